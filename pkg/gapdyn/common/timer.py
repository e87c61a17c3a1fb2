# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

import logging
from timeit import default_timer


logger = logging.getLogger(__name__)


class Timer(object):
    """Wall clock timer for integration runs and validation suites.

    Examples:
        >>> with Timer("fenchel") as t:
        ...     pass
        >>> t.interval >= 0
        True
    """

    def __init__(self, name=None):
        """Initialize the timer.

        Args:
            name (str): Optional label, used in the debug log emitted on stop.
        """
        self.name = name
        self._clock = default_timer
        self._start = None
        self._interval = 0.0
        self.running = False

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *args):
        self.stop()

    def __str__(self):
        return "{:0.4f}".format(self.interval)

    def start(self):
        """Start the timer."""
        self._start = self._clock()
        self.running = True

    def stop(self):
        """Stop the timer and store the elapsed seconds."""
        if self._start is None:
            raise ValueError(
                "Timer has not been started: use start() or the contextual form with Timer() as t:"
            )
        self._interval = self._clock() - self._start
        self.running = False
        if self.name is not None:
            logger.debug("%s finished in %.4f s", self.name, self._interval)

    @property
    def interval(self):
        """Elapsed time in seconds.

        Returns:
            float: Seconds between start and stop.
        """
        if self.running:
            raise ValueError("Timer has not been stopped, please use stop().")
        return self._interval
