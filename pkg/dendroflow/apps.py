"""
Django app configuration for the dendroflow package
"""

from django.apps import AppConfig


class DendroflowConfig(AppConfig):
    """Django app configuration for dendroflow."""

    default_auto_field = 'django.db.models.BigAutoField'
    name = 'dendroflow'
    verbose_name = 'Dendroflow level-set tree statistics'

    def ready(self):
        """Validate the DENDROFLOW settings dictionary once the registry is up."""
        from .utils import validate_settings

        validate_settings()
