import atexit
from typing import Iterable, List, Optional

from PySide6.QtCore import QCoreApplication, QEventLoop, QObject, QThread, Qt, Signal, Slot

from ..logger import log
from .actions import Action


class _SweepDriverWorker(QThread):
    action_done = Signal(Action)
    _do_action = Signal(Action)

    def __init__(self, parent: Optional[QObject] = None) -> None:
        super().__init__(parent=parent)
        self.moveToThread(self)
        self._do_action.connect(self.do_action, Qt.ConnectionType.QueuedConnection)
        self.start()

    def submit(self, action: Action) -> None:
        self._do_action.emit(action)

    @Slot()
    def do_action(self, action: Action) -> None:
        action.run()
        action.completed = True
        self.action_done.emit(action)


class SweepDriver(QObject):
    """Runs actions on a fixed pool of worker threads.

    Actions are handed out round-robin in submission order; completion order
    is not defined, :meth:`run` returns them sorted by ``index``.
    """
    action_done = Signal(Action)

    def __init__(self, workers: int = 2, parent: Optional[QObject] = None):
        super().__init__(parent=parent)
        if workers < 1:
            raise ValueError(f'need at least one worker, got {workers}')

        self._workers = [_SweepDriverWorker() for _ in range(workers)]
        for worker in self._workers:
            worker.action_done.connect(self._worker_action_done, Qt.ConnectionType.QueuedConnection)
        self._next = 0

    @property
    def worker_count(self) -> int:
        return len(self._workers)

    def do(self, action: Action) -> None:
        worker = self._workers[self._next % len(self._workers)]
        self._next += 1
        log.debug(f'dispatching {type(action).__name__} #{action.index}')
        worker.submit(action)

    @Slot()
    def _worker_action_done(self, action: Action) -> None:
        if action.user_callback:
            action.user_callback(action)
        self.action_done.emit(action)

    def run(self, actions: Iterable[Action], raise_errors: bool = True) -> List[Action]:
        """Run ``actions`` and block until all of them completed.

        With ``raise_errors`` the first failure in index order is raised
        after every action has finished.
        """
        pending = list(actions)
        if not pending:
            return []

        event_loop = QEventLoop()
        remaining = len(pending)

        def action_done(action: Action) -> None:
            nonlocal remaining
            remaining -= 1
            if remaining == 0:
                event_loop.quit()

        self.action_done.connect(action_done)
        try:
            for action in pending:
                self.do(action)
            event_loop.exec()
        finally:
            self.action_done.disconnect(action_done)

        done = sorted(pending, key=lambda a: a.index)
        log.debug(f'{len(done)} actions completed')
        if raise_errors:
            for action in done:
                if action.result is not None:
                    raise action.result
        return done

    def stop(self):
        for worker in self._workers:
            worker.quit()
            if not worker.wait(1000):
                worker.terminate()


_app: Optional[QCoreApplication] = None
_driver: Optional[SweepDriver] = None


def sweep_driver(workers: int = 2) -> SweepDriver:
    """The process-wide driver, created on first use together with a QCoreApplication."""
    global _app, _driver
    if QCoreApplication.instance() is None:
        _app = QCoreApplication([])
    if _driver is None or _driver.worker_count != workers:
        if _driver is not None:
            _driver.stop()
        _driver = SweepDriver(workers)
    return _driver


@atexit.register
def _stop_driver() -> None:
    if _driver is not None:
        _driver.stop()
