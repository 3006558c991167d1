import importlib
import logging
import sys

import beamlink.log
from beamlink.log import configure_logging


def test_configure_logging_is_idempotent():
    configure_logging("INFO")
    root = logging.getLogger("beamlink")
    handlers = list(root.handlers)
    configure_logging("DEBUG")
    assert root.handlers == handlers
    assert root.level == logging.DEBUG
    configure_logging("WARNING")
    assert root.level == logging.WARNING


def test_missing_concurrent_handler_warns_on_stderr(monkeypatch, capsys):
    configured = beamlink.log._CONFIGURED  # pylint: disable=protected-access
    monkeypatch.setitem(sys.modules, "concurrent_log_handler", None)
    try:
        importlib.reload(beamlink.log)
        assert not beamlink.log.CONCURRENT_LOG_AVAILABLE
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "concurrent-log-handler not installed" in captured.err
    finally:
        monkeypatch.undo()
        importlib.reload(beamlink.log)
        beamlink.log._CONFIGURED = configured  # pylint: disable=protected-access
