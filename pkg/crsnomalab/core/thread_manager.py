import inspect
from collections import defaultdict
from contextlib import contextmanager

from PyQt6.QtCore import QObject, QRunnable, QThreadPool, QMutexLocker, QMutex, QWaitCondition

from crsnomalab.core import logger
from crsnomalab.core.errors import LabError


def log_active_threads(thread_pool=None) -> None:
    """
    Logs the active thread count of a QThreadPool (the global instance by default).

    :return: None
    """
    thread_pool = thread_pool or QThreadPool.globalInstance()
    logger.debug(f"[ThreadManager] Active threads: {thread_pool.activeThreadCount()}")


class TaskOutcome:
    """Holds what a task returned or raised; plain Python so it outlives the QRunnable."""

    __slots__ = ('value', 'error', 'done')

    def __init__(self):
        self.value = None
        self.error = None
        self.done = False


class TaskRunnable(QRunnable):
    def __init__(self, function: callable, outcome: TaskOutcome, on_finished: callable = None, tag: str = None,
                 stop_flag: callable = None, *args, **kwargs) -> None:
        super().__init__()
        self.setAutoDelete(False)
        self.function = function
        self.outcome = outcome
        self.on_finished = on_finished
        self.tag = tag
        self.stop_flag = stop_flag
        self.args = args
        self.kwargs = kwargs

    def run(self) -> None:
        try:
            if 'stop_flag' in inspect.signature(self.function).parameters:
                self.outcome.value = self.function(*self.args, stop_flag=self.stop_flag, **self.kwargs)
            else:
                self.outcome.value = self.function(*self.args, **self.kwargs)
        except Exception as e:
            logger.error(f"[ThreadManager] Error executing task with tag '{self.tag}': {e}")
            self.outcome.error = e
        finally:
            self.outcome.done = True
            if self.on_finished:
                try:
                    self.on_finished(self.tag)
                except Exception as e:
                    logger.error(f"[ThreadManager] Error in on_finished callback for tag '{self.tag}': {e}")


class ThreadManager(QObject):
    """
    Runs independent work items (Monte Carlo chunks, grid points) on a QThreadPool.
    Tasks are counted per tag so callers can block until a batch completes.
    """

    def __init__(self, max_workers: int = 16) -> None:
        super().__init__()
        self.thread_pool = QThreadPool()
        self.thread_pool.setMaxThreadCount(max(1, int(max_workers)))
        self.is_shutting_down = False
        self.is_shutting_down_mutex = QMutex()
        self.active_tasks_by_tag = defaultdict(int)
        self.stop_flags_by_tag = defaultdict(lambda: False)
        self.tag_mutex = QMutex()
        self.tag_condition = QWaitCondition()
        self._batch_counter = 0

    @property
    def max_workers(self) -> int:
        return self.thread_pool.maxThreadCount()

    def submit_task(self, task: callable, *args, tag: str = None, on_finished: callable = None,
                    **kwargs) -> tuple:
        with QMutexLocker(self.is_shutting_down_mutex):
            if self.is_shutting_down:
                raise LabError("[ThreadManager] Cannot submit new tasks, shutdown in progress.")

            outcome = TaskOutcome()
            runnable = TaskRunnable(
                task,
                outcome,
                on_finished or self.task_finished_callback,
                tag,
                lambda: self.stop_flags_by_tag[tag],
                *args,
                **kwargs
            )
            handle = (runnable, outcome)

            if tag:
                with QMutexLocker(self.tag_mutex):
                    self.active_tasks_by_tag[tag] += 1

            self.thread_pool.start(runnable)
            return handle

    def run_ordered(self, function: callable, items, tag: str = None) -> list:
        """
        Applies `function` to every item on the pool and returns the results in item order.
        A failing task stops the items of its batch that have not started yet; the first
        exception is re-raised here after the batch finishes.

        :param function: Callable taking one item.
        :param items: Iterable of work items.
        :param tag: Batch tag; a unique one is generated when omitted.
        :return: List of results, one per item.
        """
        items = list(items)
        if tag is None:
            self._batch_counter += 1
            tag = f"batch-{id(self)}-{self._batch_counter}"
        self.reset_stop_flag(tag)

        def guarded(item, stop_flag):
            if stop_flag():
                return None
            try:
                return function(item)
            except Exception:
                self.stop_tasks_by_tag(tag)
                raise

        handles = [self.submit_task(guarded, item, tag=tag) for item in items]
        self.wait_for_tagged_tasks(tag)
        log_active_threads(self.thread_pool)

        results = []
        for _runnable, outcome in handles:
            if outcome.error is not None:
                raise outcome.error
            results.append(outcome.value)
        return results

    def stop_tasks_by_tag(self, tag: str) -> None:
        """
        Signal all tasks with the given tag to stop.
        """
        with QMutexLocker(self.tag_mutex):
            if tag in self.active_tasks_by_tag:
                self.stop_flags_by_tag[tag] = True
                logger.info(f"[ThreadManager] Stop signal sent for tasks with tag '{tag}'")

    def reset_stop_flag(self, tag: str) -> None:
        """
        Reset the stop flag for the specified tag.
        """
        with QMutexLocker(self.tag_mutex):
            self.stop_flags_by_tag[tag] = False

    def task_finished_callback(self, tag: str) -> None:
        if tag:
            with QMutexLocker(self.tag_mutex):
                if tag in self.active_tasks_by_tag:
                    self.active_tasks_by_tag[tag] -= 1
                    if self.active_tasks_by_tag[tag] <= 0:
                        self.active_tasks_by_tag.pop(tag, None)
                        self.stop_flags_by_tag.pop(tag, None)
                        self.tag_condition.wakeAll()

    def wait_for_tagged_tasks(self, tag: str) -> None:
        """
        Waits for all tasks associated with the specified tag to complete.

        :param tag: The tag of the tasks to wait for.
        :return: None
        """
        with QMutexLocker(self.tag_mutex):
            while tag in self.active_tasks_by_tag:
                self.tag_condition.wait(self.tag_mutex)

    def shutdown(self) -> None:
        """
        Prevents new submissions, signals running tasks to stop and waits for the pool to drain.

        :return: None
        """
        logger.info("[ThreadManager] Shutting down thread pool.")

        with QMutexLocker(self.is_shutting_down_mutex):
            self.is_shutting_down = True

        with QMutexLocker(self.tag_mutex):
            for tag in self.active_tasks_by_tag:
                self.stop_flags_by_tag[tag] = True

        self.thread_pool.clear()
        self.thread_pool.waitForDone()
        logger.info("[ThreadManager] Thread pool drained.")


_shared_managers = {}


def get_thread_manager(workers: int):
    """
    Shared ThreadManager for `workers` threads, or None for a single worker (callers then
    run their work inline).
    """
    workers = max(1, int(workers))
    if workers == 1:
        return None
    if workers not in _shared_managers:
        _shared_managers[workers] = ThreadManager(max_workers=workers)
        logger.debug(f"[ThreadManager] Created shared pool with {workers} threads")
    return _shared_managers[workers]


def shutdown_thread_managers() -> int:
    """Shuts down and forgets every shared pool; returns how many there were."""
    managers = list(_shared_managers.values())
    _shared_managers.clear()
    for manager in managers:
        manager.shutdown()
    return len(managers)


@contextmanager
def scoped_thread_manager(thread_manager=None, workers: int = 1):
    """
    Yields `thread_manager` untouched when one is given. Otherwise yields a private pool of
    `workers` threads (None for a single worker) and shuts it down on exit.
    """
    if thread_manager is not None:
        yield thread_manager
        return
    workers = max(1, int(workers))
    if workers == 1:
        yield None
        return
    owned = ThreadManager(max_workers=workers)
    try:
        yield owned
    finally:
        owned.shutdown()
