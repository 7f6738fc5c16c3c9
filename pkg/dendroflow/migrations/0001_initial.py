import django.utils.timezone
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=255)),
                ('operation', models.CharField(choices=[('horton_tokunaga', 'Horton and Tokunaga laws'), ('forest', 'Forest of excursions'), ('basin_counts', 'Basin counts'), ('gw_equivalence', 'Galton-Watson shapes'), ('asymmetric_decay', 'Asymmetric decay'), ('fbm_conjecture', 'fBm conjecture'), ('pruning_commutation', 'Structural checks'), ('minima_jumps', 'Minima jumps'), ('dss', 'Self-similarity residual')], max_length=30)),
                ('seed', models.BigIntegerField(default=0)),
                ('source', models.CharField(blank=True, max_length=500)),
                ('config', models.JSONField(blank=True, default=dict)),
                ('report', models.JSONField(blank=True, default=dict)),
                ('passed', models.BooleanField(default=False)),
                ('partial', models.BooleanField(default=False)),
                ('wall_time', models.FloatField(blank=True, null=True)),
                ('created_at', models.DateTimeField(default=django.utils.timezone.now)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [
                    models.Index(fields=['operation', 'created_at'], name='dendroflow_run_op_idx'),
                    models.Index(fields=['name', 'created_at'], name='dendroflow_run_name_idx'),
                ],
            },
        ),
    ]
