import time


class Stopwatch:
    """Wall-clock timer for stage timing log lines."""

    def __init__(self):
        self.start_time = time.perf_counter()
        self.step_time = self.start_time

    def reset(self):
        self.start_time = time.perf_counter()
        self.step_time = self.start_time

    def elapsed(self) -> float:
        return time.perf_counter() - self.start_time

    def step(self) -> float:
        """Seconds since the previous step (or the start)."""
        now = time.perf_counter()
        elapsed = now - self.step_time
        self.step_time = now
        return elapsed

    def __str__(self):
        return f"{self.elapsed():.2f}s"

    def __repr__(self):
        return f"Stopwatch({self.elapsed():.2f}s)"
