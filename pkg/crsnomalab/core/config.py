import os

import confuse
from confuse.sources import EnvSource
from confumo import Confumo

from crsnomalab.core.errors import ConfigurationError

LOGGER_NAME = 'crsnomalab'
LOG_FILE_NAME = f'{LOGGER_NAME}.log'
APP_NAME = 'crs-noma-lab'
VERSION = '0.1.0'
LOG_LEVEL = "INFO"

# confumo keys the singleton, the env prefix (CRSNOMALAB_*) and the user config dir by this name
CONFIG_APP_NAME = LOGGER_NAME

# a2 in {0.01, 0.02, ..., 0.24}
DEFAULT_A2_GRID = tuple(round(0.01 * i, 2) for i in range(1, 25))

DEFAULTS = {
    # link strengths and target rate
    'omega_sd': 1.0,
    'omega_sr': 10.0,
    'omega_rd': 2.5,
    'target_rate': 1.0,

    'n_trials': 1_000_000,
    'seed': 20190425,
    'chunk_size': 2 ** 16,
    'workers': None,

    'rate_rho_db': (0.0, 30.0, 2.0),
    'outage_rho_db': (0.0, 40.0, 2.5),
    'a2_grid': DEFAULT_A2_GRID,

    'quad_epsabs': 1e-12,
    'quad_epsrel': 1e-12,
    'ccdf_cutoff': 1e-14,
    'stderr_bound': 4.0,

    'log_dir': None,
    'log_level': LOG_LEVEL,
    'profile': False,
}

_FLOATS = ('omega_sd', 'omega_sr', 'omega_rd', 'target_rate', 'quad_epsabs', 'quad_epsrel', 'ccdf_cutoff',
           'stderr_bound')
_INTS = ('n_trials', 'seed', 'chunk_size')
_FLOAT_TUPLES = ('rate_rho_db', 'outage_rho_db', 'a2_grid')

GLOBAL_ARGS = [
    {'flags': ['--log-dir'],
     'kwargs': {'default': None, 'help': 'Also write the log file into this directory'}},
    {'flags': ['--log-level'],
     'kwargs': {'default': None, 'help': 'Logging level (DEBUG, INFO, WARNING, ...)'}},
    {'flags': ['--workers'],
     'kwargs': {'type': int, 'default': None, 'help': 'Worker threads for Monte Carlo chunks'}},
    {'flags': ['--profile'],
     'kwargs': {'action': 'store_true', 'default': None, 'help': 'Write cProfile statistics for the run'}},
]


class LabConfiguration(Confumo):
    """
    Process-wide defaults shared by the analysis engines, the simulator and the CLI.

    Values are layered by confumo: the defaults above, then the YAML file given with
    -c/--config, then CRSNOMALAB_* environment variables, then explicit command-line flags.
    """

    def __init__(self, app_name=CONFIG_APP_NAME):
        super().__init__(app_name)

    @classmethod
    def get_instance(cls):
        return Confumo.get(CONFIG_APP_NAME, cls)

    @classmethod
    def reset_instance(cls):
        Confumo._registry.pop(CONFIG_APP_NAME, None)

    def add_args(self, parser):
        for argument in GLOBAL_ARGS:
            parser.add_argument(*argument['flags'], **argument['kwargs'])
        return parser

    def _init_subclass(self):
        self.cfg.add(DEFAULTS)
        self._read_settings()

    def _read_settings(self):
        view = self.cfg
        try:
            values = {key: view[key].get() for key in DEFAULTS}
            for key in _FLOATS:
                values[key] = float(values[key])
            for key in _INTS:
                values[key] = int(values[key])
            for key in _FLOAT_TUPLES:
                values[key] = tuple(float(v) for v in values[key])
            values['workers'] = int(values['workers']) if values['workers'] is not None else (os.cpu_count() or 1)
            values['profile'] = bool(values['profile'])
        except (TypeError, ValueError, confuse.ConfigError) as e:
            raise ConfigurationError(f"Invalid configuration value: {e}") from None
        self.__dict__.update(values)

    def to_dict(self):
        return {key: getattr(self, key) for key in DEFAULTS}

    def update(self, **overrides):
        """Overlays `overrides` on every other source and re-reads the settings."""
        unknown = sorted(set(overrides) - set(DEFAULTS))
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {', '.join(unknown)}")
        self.cfg.set(overrides)
        self._read_settings()
        return self

    def load_yaml(self, path):
        """Adds a YAML file just below the environment layer, rejecting keys it does not know."""
        try:
            self.cfg.set_file(path)
        except (confuse.ConfigError, TypeError, ValueError) as e:
            raise ConfigurationError(f"{path}: {e}") from None
        source = self.cfg.sources.pop(0)
        unknown = sorted(set(source) - set(DEFAULTS))
        if unknown:
            raise ConfigurationError(f"{path}: unknown configuration keys: {', '.join(unknown)}")
        below_env = next((i + 1 for i, s in enumerate(self.cfg.sources) if isinstance(s, EnvSource)), 0)
        self.cfg.sources.insert(below_env, source)
        self._read_settings()
        return self

    def apply_args(self, args):
        """Layers the flags of an already parsed command line (its --config file first)."""
        if getattr(args, 'config_file', None):
            self.load_yaml(args.config_file)
        explicit = {key: getattr(args, key, None) for key in ('log_dir', 'log_level', 'workers', 'profile')}
        explicit = {key: value for key, value in explicit.items() if value is not None}
        if explicit:
            self.update(**explicit)
        return self

    def __repr__(self):
        body = ', '.join(f'{key}={value!r}' for key, value in self.to_dict().items())
        return f"LabConfiguration({body})"

    def __eq__(self, other):
        if not isinstance(other, LabConfiguration):
            return False
        return self.to_dict() == other.to_dict()
