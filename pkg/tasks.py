# Lets `invoke -l` list the jumpsets tasks from a checkout.
from jumpsets.tasks import consistency, estimate, generate, metrics, oracle_check, rate_sweep, topology  # noqa
