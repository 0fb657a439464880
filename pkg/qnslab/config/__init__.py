"""
Configuration support functionality.

An experiment is described by an L{ExperimentConfig}: the defaults from the defaults.cfg file
in this package, overlaid with an experiment file and then with command-line overrides, all
checked strictly against the defaults.

from qnslab.config import load_experiment
cfg = load_experiment('/path/to/experiment.cfg', {('corpus', 'seed'): '1'})

cfg.getint('grid', 'n_dims')
"""
import configparser
import hashlib
import io
import json
import logging
import logging.config
import os.path
from configparser import ConfigParser

import six

from qnslab.exception import ConfigError

__authors__ = ['qnslab contributors']
__copyright__ = "Copyright 2026 qnslab contributors"
__license__ = """Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License."""

DEFAULTS_FILE = os.path.join(os.path.dirname(__file__), 'defaults.cfg')

# Keys that are legal although defaults.cfg does not set them.
OPTIONAL_KEYS = {('corpus', 'seed')}

# Sections consumed by logging.config.fileConfig are allowed to share the experiment file.
LOGGING_SECTIONS = ('loggers', 'handlers', 'formatters')
LOGGING_PREFIXES = ('logger_', 'handler_', 'formatter_')

def _is_logging_section(name):
    return name in LOGGING_SECTIONS or name.startswith(LOGGING_PREFIXES)


def default_parser():
    """
    A fresh parser holding the packaged defaults.
    """
    parser = ConfigParser()
    parser.read(DEFAULTS_FILE)
    return parser


def check_strict(parser, reference):
    """
    Reject sections and keys that the defaults do not define.

    @param parser: The parser holding user supplied values.
    @type parser: C{configparser.ConfigParser}

    @param reference: The parser holding the defaults.
    @type reference: C{configparser.ConfigParser}

    @raise ConfigError: On the first unknown section or key.
    """
    for section in parser.sections():
        if _is_logging_section(section):
            continue
        if not reference.has_section(section):
            raise ConfigError('Unknown configuration section: [%s]' % section)
        for key in parser.options(section):
            if not reference.has_option(section, key) and (section, key) not in OPTIONAL_KEYS:
                raise ConfigError('Unknown configuration key: %s.%s' % (section, key))


def init_logging(logfile=None, loglevel=logging.INFO, configfile=None):
    """
    Configures the logging using either basic filename + loglevel or passed config file path.

    This is performed separately from L{load_experiment} so that a run can decide on its
    logging destination before its experiment configuration is validated.

    @param logfile: An explicitly specified logfile destination.  If this is specified in addition
                    to default logging, a warning will be issued.
    @type logfile: C{str}

    @param loglevel: Which level to use when logging to explicitly specified file or stdout.
    @type loglevel: C{int}

    @param configfile: The path to a configuration file.  This takes precedence over any explicitly
                        specified logfile/loglevel (but a warning will be logged if both are specified).
                        The file is only used for logging when it has a [loggers] section.
    @type configfile: C{str}

    @raise ConfigError: If the file cannot be parsed or its logging sections are invalid.
    """
    use_configfile = False
    if configfile and os.path.exists(configfile):
        testcfg = ConfigParser()
        try:
            read = testcfg.read(configfile)
        except configparser.Error as e:
            raise ConfigError('Cannot parse %s: %s' % (configfile, e))
        use_configfile = (read and testcfg.has_section('loggers'))

    if use_configfile:
        try:
            logging.config.fileConfig(configfile, disable_existing_loggers=False)
        except (configparser.Error, KeyError, ValueError) as e:
            raise ConfigError('Invalid logging configuration in %s: %r' % (configfile, e))
        if logfile:
            msg = "Config file conflicts with explicitly specified logfile; config file takes precedence."
            logging.warning(msg)
    else:
        format = '%(asctime)s [%(threadName)s] %(name)s - %(levelname)s - %(message)s'
        if logfile:
            logging.basicConfig(
                filename=logfile, level=loglevel, format=format)
        else:
            logging.basicConfig(level=loglevel, format=format)


def resolve_name(name):
    """
    Resolve a dotted name to some object (usually class, module, or function).

    Supported naming formats include:
        1. path.to.module:method
        2. path.to.module.ClassName

    >>> resolve_name('qnslab.store.memory.MemoryStore')
    <class 'qnslab.store.memory.MemoryStore'>
    >>> t = resolve_name('qnslab.store.directory:make_directory_store')
    >>> import inspect
    >>> inspect.isfunction(t)
    True
    >>> t.__name__
    'make_directory_store'

    @param name: The dotted name (e.g. path.to.MyClass)
    @type name: C{str}

    @return: The resolved object (class, callable, etc.) or None if not found.
    """
    if ':' in name:
        # Normalize foo.bar.baz:main to foo.bar.baz.main
        # (since our logic below will handle that)
        name = '%s.%s' % tuple(name.split(':'))

    name = name.split('.')

    used = name.pop(0)
    found = __import__(used)
    for n in name:
        used = used + '.' + n
        try:
            found = getattr(found, n)
        except AttributeError:
            __import__(used)
            found = getattr(found, n)

    return found


def parse_list(value, convert=float):
    """
    Split a comma separated option value.

    >>> parse_list('0, 0.25,0.5')
    [0.0, 0.25, 0.5]
    >>> parse_list('')
    []
    """
    if isinstance(value, six.string_types):
        value = [v for v in (p.strip() for p in value.split(',')) if v]
    return [convert(v) for v in value]


class ExperimentConfig(object):
    """
    A strict, materialized snapshot of an experiment configuration.

    All defaults are copied into the snapshot so that L{as_dict} (and the run manifest built
    from it) describes the run completely.

    @ivar parser: The underlying parser (defaults overlaid with the user file and overrides).
    @type parser: C{configparser.ConfigParser}
    """

    def __init__(self, parser):
        self.parser = parser
        self.log = logging.getLogger('%s.%s' % (self.__module__, self.__class__.__name__))
        self._validate()

    def _validate(self):
        try:
            self.seed
            n = self.n_dims
            if n not in (2, 3):
                raise ConfigError('grid.n_dims must be 2 or 3, got %s' % n)
            res = self.resolution
            if res < 16 or res & (res - 1):
                raise ConfigError('grid.resolution must be a power of two >= 16, got %s' % res)
            if self.box_length <= 0:
                raise ConfigError('grid.box_length must be positive')
            if not 0.0 < self.parser.getfloat('time', 'rho') < 1.0:
                raise ConfigError('time.rho must lie in (0, 1)')
            iterations = self.parser.getint('solver', 'picard_iterations')
            if not 1 <= iterations <= 32:
                raise ConfigError('solver.picard_iterations must lie in [1, 32]')
            if self.parser.getint('time', 'levels') < 12:
                raise ConfigError('time.levels must be at least 12')
            for alpha in self.alphas + [self.parser.getfloat('solver', 'alpha')]:
                if not 0.0 <= alpha < 1.0:
                    raise ConfigError('alpha values must lie in [0, 1), got %s' % alpha)
        except ValueError as e:
            raise ConfigError('Malformed configuration value: %s' % e)

    @property
    def seed(self):
        if not self.parser.has_option('corpus', 'seed') or not self.parser.get('corpus', 'seed').strip():
            raise ConfigError('Missing configuration parameter: corpus.seed (or --seed)')
        return self.parser.getint('corpus', 'seed')

    @property
    def n_dims(self):
        return self.parser.getint('grid', 'n_dims')

    @property
    def resolution(self):
        value = self.parser.get('grid', 'resolution').strip()
        if value == 'auto':
            return 128 if self.n_dims == 2 else 64
        return int(value)

    @property
    def box_length(self):
        return self.parser.getfloat('grid', 'box_length')

    @property
    def alphas(self):
        return parse_list(self.parser.get('corpus', 'alphas'))

    @property
    def threads(self):
        return max(1, self.parser.getint('output', 'threads'))

    def get(self, section, key):
        return self.parser.get(section, key)

    def getint(self, section, key):
        return self.parser.getint(section, key)

    def getfloat(self, section, key):
        return self.parser.getfloat(section, key)

    def as_dict(self):
        """
        All sections and keys (defaults included) as plain strings, sorted for stable output.

        @rtype: C{dict} of C{str} to C{dict}
        """
        result = {}
        for section in sorted(self.parser.sections()):
            if _is_logging_section(section):
                continue
            result[section] = dict(sorted(self.parser.items(section)))
        if 'resolution' in result.get('grid', {}):
            result['grid']['resolution'] = str(self.resolution)
        return result

    def digest(self):
        """
        The config hash named by every output file (first 12 hex digits of a SHA-256).
        """
        payload = json.dumps(self.as_dict(), sort_keys=True).encode('utf-8')
        return hashlib.sha256(payload).hexdigest()[:12]


def load_experiment(config_file=None, overrides=None):
    """
    Build an L{ExperimentConfig} from defaults.cfg, an optional experiment file and overrides.

    @param config_file: Path (or file-like object) of the experiment file, or None.
    @type config_file: C{str}

    @param overrides: Mapping of (section, key) to string values applied last (CLI flags).
    @type overrides: C{dict}

    @raise ConfigError: For unparseable files, unknown keys, malformed values or a missing seed.
    @raise OSError: If the named file does not exist.
    """
    parser = default_parser()
    if config_file is not None:
        user = ConfigParser()
        name = getattr(config_file, 'name', config_file)
        try:
            if hasattr(config_file, 'read'):
                user.read_file(config_file)
            else:
                if not os.path.exists(config_file):
                    raise IOError('Configuration file does not exist: %s' % config_file)
                with io.open(config_file, 'r', encoding='utf-8') as fp:
                    user.read_file(fp)
            check_strict(user, parser)
            for section in user.sections():
                if _is_logging_section(section):
                    continue
                for key in user.options(section):
                    parser.set(section, key, user.get(section, key))
        except configparser.Error as e:
            raise ConfigError('Cannot parse configuration %s: %s' % (name, e))
    for (section, key), value in sorted((overrides or {}).items()):
        if value is None:
            continue
        if not parser.has_option(section, key) and (section, key) not in OPTIONAL_KEYS:
            raise ConfigError('Unknown configuration key: %s.%s' % (section, key))
        parser.set(section, key, str(value))
    return ExperimentConfig(parser)
