"""
Standalone ``dendroflow`` console script.

Runs the management commands without a Django project: settings are
configured on the fly with this app installed, an SQLite run history at
``DENDROFLOW_DATABASE`` and console logging at ``DENDROFLOW_LOG_LEVEL``.
"""

import os
import sys

from django.conf import settings


def configure(environ=None):
    """Configure minimal Django settings unless a project already did."""
    if settings.configured or 'DJANGO_SETTINGS_MODULE' in os.environ:
        return
    environ = os.environ if environ is None else environ
    level = environ.get('DENDROFLOW_LOG_LEVEL', 'WARNING').upper()
    save = environ.get('DENDROFLOW_SAVE_TO_DATABASE', '').lower() in ('1', 'true', 'yes', 'on')
    settings.configure(
        INSTALLED_APPS=['dendroflow'],
        DATABASES={
            'default': {
                'ENGINE': 'django.db.backends.sqlite3',
                'NAME': environ.get('DENDROFLOW_DATABASE', 'dendroflow.sqlite3'),
            }
        },
        DEFAULT_AUTO_FIELD='django.db.models.BigAutoField',
        USE_TZ=True,
        DENDROFLOW={'SAVE_TO_DATABASE': save},
        LOGGING={
            'version': 1,
            'disable_existing_loggers': False,
            'formatters': {
                'simple': {'format': '{levelname} {name}: {message}', 'style': '{'},
            },
            'handlers': {
                'console': {'class': 'logging.StreamHandler', 'formatter': 'simple'},
            },
            'loggers': {
                'dendroflow': {'handlers': ['console'], 'level': level, 'propagate': False},
            },
        },
    )


def main(argv=None):
    """Entry point: ``dendroflow <simulate|analyze|prune|dynamics|experiment> ...``."""
    from django.core.management import execute_from_command_line

    configure()
    argv = list(sys.argv if argv is None else argv)
    argv[0] = 'dendroflow'
    execute_from_command_line(argv)


if __name__ == '__main__':
    main()
