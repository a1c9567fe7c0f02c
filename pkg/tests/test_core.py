import logging
import os
import sys

import pytest
from confumo import Confumo

from crsnomalab.core import logger as logger_module
from crsnomalab.core.config import CONFIG_APP_NAME, DEFAULT_A2_GRID, LabConfiguration
from crsnomalab.core.config_manager import RHO_OUTAGE_DB, RHO_RATE_DB, all_figure_presets, rho_grid
from crsnomalab.core.errors import ConfigurationError, DomainError, LabError, NumericalFailure, UsageError, require
from crsnomalab.core.event_bus import EventBus, create_or_get_shared_event_bus, get_shared_event_bus
from crsnomalab.core.logger import configure_logger
from crsnomalab.core.logging_utils import log_a2_trace, log_expansion_terms, log_table
from crsnomalab.core.profiler import profile_function
from crsnomalab.core import thread_manager
from crsnomalab.core.thread_manager import (ThreadManager, get_thread_manager, scoped_thread_manager,
                                            shutdown_thread_managers)
from crsnomalab.analysis.channel_model import CombinerKind, ccdf_terms
from crsnomalab.analysis.power_opt import ccdf_factor_trace


def test_configuration_is_a_confumo_singleton():
    first = LabConfiguration.get_instance()
    assert LabConfiguration.get_instance() is first
    assert Confumo.get(CONFIG_APP_NAME, LabConfiguration) is first
    LabConfiguration.reset_instance()
    assert LabConfiguration.get_instance() is not first


def test_configuration_defaults():
    configuration = LabConfiguration()
    assert (configuration.omega_sd, configuration.omega_sr, configuration.omega_rd) == (1.0, 10.0, 2.5)
    assert configuration.a2_grid == DEFAULT_A2_GRID
    assert DEFAULT_A2_GRID[0] == 0.01 and DEFAULT_A2_GRID[-1] == 0.24 and len(DEFAULT_A2_GRID) == 24
    assert configuration.chunk_size == 65536
    assert configuration.stderr_bound == 4.0
    assert configuration.workers >= 1 and configuration.profile is False


def test_update_and_copy():
    configuration = LabConfiguration()
    duplicate = configuration.copy()
    assert duplicate == configuration
    configuration.update(seed=3, a2_grid=[0.1, 0.2])
    assert configuration.a2_grid == (0.1, 0.2)
    assert configuration.seed == 3
    assert duplicate.seed == 20190425
    assert duplicate != configuration
    assert duplicate != "not a configuration"
    with pytest.raises(ConfigurationError):
        configuration.update(sead=4)


def test_load_yaml_needs_a_mapping(tmp_path):
    path = tmp_path / 'list.yaml'
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError):
        LabConfiguration().load_yaml(str(path))
    empty = tmp_path / 'empty.yaml'
    empty.write_text("")
    assert LabConfiguration().load_yaml(str(empty)) == LabConfiguration()
    with pytest.raises(ConfigurationError):
        LabConfiguration().load_yaml(str(tmp_path / 'absent.yaml'))


def test_load_yaml_rejects_unknown_keys(tmp_path):
    path = tmp_path / 'lab.yaml'
    path.write_text("seeds: 5\n")
    configuration = LabConfiguration()
    with pytest.raises(ConfigurationError, match="seeds"):
        configuration.load_yaml(str(path))
    assert configuration.seed == 20190425


def test_global_flags_come_from_the_command_line(monkeypatch):
    monkeypatch.setattr(sys, 'argv', ['crs-noma-lab', 'rate-sweep', '--workers', '3', '--log-level', 'DEBUG'])
    configuration = LabConfiguration()
    assert configuration.workers == 3
    assert configuration.log_level == 'DEBUG'


def test_environment_overrides_the_config_file(monkeypatch, tmp_path):
    path = tmp_path / 'lab.yaml'
    path.write_text("seed: 5\nomega_rd: 4.0\n")
    monkeypatch.setattr(sys, 'argv', ['crs-noma-lab', '-c', str(path)])
    monkeypatch.setenv('CRSNOMALAB_SEED', '7')
    configuration = LabConfiguration()
    assert configuration.omega_rd == 4.0
    assert configuration.seed == 7


def test_error_hierarchy():
    assert issubclass(UsageError, ConfigurationError)
    assert issubclass(ConfigurationError, DomainError)
    assert issubclass(DomainError, ValueError) and issubclass(DomainError, LabError)
    assert issubclass(NumericalFailure, ArithmeticError)
    require(True, "unused")
    with pytest.raises(ConfigurationError, match="bad"):
        require(False, "bad", ConfigurationError)


def test_numerical_failure_message():
    error = NumericalFailure("did not converge", rho=10.0, term=(1, 2))
    assert str(error) == "did not converge (rho=10.0) [term=(1, 2)]"
    assert str(NumericalFailure("plain")) == "plain"


def test_event_bus():
    bus = EventBus()
    received = []
    callback = lambda *args, **kwargs: received.append((args, kwargs))  # noqa: E731
    bus.subscribe('ping', callback)
    bus.emit('ping', 1, key='x')
    bus.unsubscribe('ping', callback)
    bus.unsubscribe('ping', callback)
    bus.emit('ping', 2)
    assert received == [((1,), {'key': 'x'})]


def test_shared_event_bus():
    bus = create_or_get_shared_event_bus('core-test')
    assert create_or_get_shared_event_bus('core-test') is bus
    assert get_shared_event_bus('core-test') is bus
    assert get_shared_event_bus('never-created') is None


def test_run_ordered_keeps_item_order():
    manager = ThreadManager(max_workers=4)
    try:
        assert manager.max_workers == 4
        assert manager.run_ordered(lambda x: x * x, range(20)) == [x * x for x in range(20)]
    finally:
        manager.shutdown()


def test_run_ordered_reraises_task_errors():
    manager = ThreadManager(max_workers=2)

    def task(x):
        if x == 3:
            raise DomainError("three")
        return x

    try:
        with pytest.raises(DomainError, match="three"):
            manager.run_ordered(task, range(6))
    finally:
        manager.shutdown()


def test_failing_task_stops_the_rest_of_its_batch():
    manager = ThreadManager(max_workers=1)
    started = []

    def task(x):
        started.append(x)
        raise DomainError("first item fails")

    try:
        with pytest.raises(DomainError):
            manager.run_ordered(task, range(5))
        assert started == [0]
    finally:
        manager.shutdown()


def test_shutdown_refuses_new_work():
    manager = ThreadManager(max_workers=1)
    manager.shutdown()
    with pytest.raises(LabError):
        manager.submit_task(lambda: None)


def test_shared_thread_manager():
    assert get_thread_manager(1) is None
    assert get_thread_manager(0) is None
    shared = get_thread_manager(3)
    assert get_thread_manager(3) is shared
    assert shutdown_thread_managers() == 1
    assert thread_manager._shared_managers == {}
    assert shared.is_shutting_down
    assert get_thread_manager(3) is not shared
    shutdown_thread_managers()


def test_scoped_thread_manager_owns_only_what_it_creates():
    with scoped_thread_manager(workers=1) as pool:
        assert pool is None
    with scoped_thread_manager(workers=2) as pool:
        assert pool.max_workers == 2
        assert pool.run_ordered(lambda x: x + 1, [1, 2]) == [2, 3]
    assert pool.is_shutting_down

    given = ThreadManager(max_workers=2)
    try:
        with scoped_thread_manager(given, workers=4) as pool:
            assert pool is given
        assert not given.is_shutting_down
    finally:
        given.shutdown()


def test_profiler_writes_statistics(tmp_path):
    @profile_function(output_dir=str(tmp_path))
    def work(n):
        return sum(range(n))

    assert work(1000) == 499500
    assert os.path.exists(tmp_path / 'work_profile.txt')


def test_module_loggers_are_named_after_their_module():
    assert logger_module.name == __name__


def test_configure_logger_writes_file(tmp_path):
    package_logger = configure_logger(log_dir=str(tmp_path), log_level='DEBUG')
    try:
        package_logger.info("hello")
        for handler in package_logger.handlers:
            handler.flush()
        assert 'hello' in (tmp_path / 'crsnomalab.log').read_text()
    finally:
        for handler in list(package_logger.handlers):
            if isinstance(handler, logging.FileHandler):
                package_logger.removeHandler(handler)
                handler.close()
        configure_logger(log_level='INFO')


def test_log_table(caplog):
    with caplog.at_level(logging.DEBUG, logger='crsnomalab'):
        log_table("[Test] table", ('a', 'longer'), [(1, 0.5), (None, 'x')])
    messages = [record.getMessage() for record in caplog.records]
    assert messages[0] == "[Test] table (2 rows)"
    assert messages[1] == "  a | longer"
    assert messages[3] == "  1 |    0.5"
    assert messages[4] == "  - |      x"


def test_log_expansion_terms(caplog, two_by_two_sc):
    terms = ccdf_terms(two_by_two_sc.sd, 2, CombinerKind.SC)
    with caplog.at_level(logging.DEBUG, logger='crsnomalab'):
        log_expansion_terms(terms)
    messages = [record.getMessage() for record in caplog.records]
    assert messages[0] == f"[Series] expansion terms ({len(terms)} rows)"
    assert messages[1].split('|')[0].strip() == 'ks'
    assert len(messages) == len(terms) + 3


def test_log_a2_trace(caplog, two_by_two_sc):
    rows = ccdf_factor_trace(two_by_two_sc, 10.0, a2_grid=[0.1, 0.3])
    with caplog.at_level(logging.DEBUG, logger='crsnomalab'):
        log_a2_trace(rows, 10.0)
    assert caplog.records[0].getMessage() == "[PowerOpt] a2 trace at 10 dB (2 rows)"


def test_rho_grids():
    assert len(RHO_RATE_DB) == 16 and RHO_RATE_DB[-1] == 30.0
    assert len(RHO_OUTAGE_DB) == 17 and RHO_OUTAGE_DB[1] == 2.5
    assert rho_grid(0.0, 1.0, 0.1)[-1] == 1.0
    assert rho_grid(5.0, 5.0, 1.0) == (5.0,)


def test_figure_presets():
    presets = all_figure_presets()
    assert sorted(presets) == ['fig2', 'fig3', 'fig4', 'fig5', 'fig6', 'fig7', 'fig8']
    assert presets['fig2'].kind == 'outage' and len(presets['fig2'].cases) == 8
    assert presets['fig3'].rho_db == (2.0,) and presets['fig4'].rho_db == (20.0,)
    assert presets['fig5'].schemes == ('noma', 'oma')
    assert presets['fig8'].a2 == 0.1 and presets['fig8'].schemes == ('noma',)
    assert all(case.m == 2 for case in presets['fig7'].cases)
