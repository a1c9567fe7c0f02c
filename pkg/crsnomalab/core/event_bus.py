import threading

SWEEP_POINT_DONE = 'sweep_point_done'
CHUNK_DONE = 'chunk_done'
OPTIMIZATION_DONE = 'optimization_done'


class EventBus:
    """Synchronous publish/subscribe hub. Callbacks run on the emitting thread."""

    def __init__(self):
        self.listeners = {}
        self._lock = threading.Lock()

    def subscribe(self, event_type, callback):
        """Subscribe to an event with a specific callback."""
        with self._lock:
            self.listeners.setdefault(event_type, []).append(callback)

    def emit(self, event_type, *args, **kwargs):
        """Emit an event and call all registered callbacks for that event type."""
        with self._lock:
            callbacks = list(self.listeners.get(event_type, ()))
        for callback in callbacks:
            callback(*args, **kwargs)

    def unsubscribe(self, event_type, callback):
        """Unsubscribe a specific callback from an event."""
        with self._lock:
            callbacks = self.listeners.get(event_type)
            if not callbacks or callback not in callbacks:
                return
            callbacks.remove(callback)
            if not callbacks:
                del self.listeners[event_type]


_shared_event_buses = {}
_shared_lock = threading.Lock()


def create_or_get_shared_event_bus(name="crsnomalab"):
    """
    Factory method to create or get a shared EventBus instance.

    Args:
        name (str): The name of the shared EventBus instance.

    Returns:
        EventBus: The shared EventBus instance.
    """
    with _shared_lock:
        if name not in _shared_event_buses:
            _shared_event_buses[name] = EventBus()
        return _shared_event_buses[name]


def get_shared_event_bus(name="crsnomalab"):
    """
    Retrieves an existing shared EventBus instance by name.

    Args:
        name (str): The name of the shared EventBus instance.

    Returns:
        EventBus: The shared EventBus instance, or None if it doesn't exist.
    """
    return _shared_event_buses.get(name)
