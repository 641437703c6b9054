"""Discrete-event cost simulator for the two modeled executors and their link.

Costs are linear in work: a task takes work/rate plus bytes/bandwidth plus
link latency when it moves data. Tasks on one role never overlap; when a
strategy co-schedules stages on a role the simulator serializes them, which
by conservation yields the same makespan as equal-share rate division (see
:func:`contention_model`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

ROLE_SLOW = "slow"
ROLE_FAST = "fast"


class SimError(ValueError):
    pass


class SimulatedOOM(RuntimeError):
    """Simulated memory accounting exceeded a device's capacity."""

    def __init__(self, task_name: str, role: str, stage: str, used: float,
                 capacity: float):
        super().__init__(
            f"simulated OOM on role {role!r} at task {task_name!r} "
            f"(stage {stage!r}): {used:.0f} bytes > capacity {capacity:.0f}"
        )
        self.task_name = task_name
        self.role = role
        self.stage = stage


@dataclass(frozen=True)
class DeviceModel:
    """Throughput and memory parameters of one modeled executor."""

    compute_rate: float  # dense-math operations per second
    sample_rate: float  # sampled edges per second
    gather_rate: float  # feature rows collected per second
    memory_capacity: float  # bytes

    def __post_init__(self):
        if min(self.compute_rate, self.sample_rate, self.gather_rate) <= 0:
            raise SimError("device rates must be positive")

    def rate(self, kind: str) -> float:
        if kind == "compute":
            return self.compute_rate
        if kind == "sample":
            return self.sample_rate
        if kind == "gather":
            return self.gather_rate
        raise SimError(f"unknown work kind {kind!r}")


@dataclass(frozen=True)
class LinkModel:
    bandwidth: float  # bytes per second
    latency: float = 0.0  # seconds per transfer

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise SimError("link bandwidth must be positive")


@dataclass
class SimTask:
    """One unit of scheduled work with explicit dependencies.

    ``mem_hold`` is allocated at start and freed at end; ``mem_persist``
    stays allocated on the role after the task finishes (freed by a later
    task carrying a negative value).
    """

    name: str
    role: str
    stage: str
    batch: int = -1
    super_batch: int = -1
    work: float = 0.0
    kind: str = "compute"
    bytes_moved: float = 0.0
    deps: tuple = ()
    mem_hold: float = 0.0
    mem_persist: float = 0.0


@dataclass
class TraceEvent:
    start: float
    end: float
    role: str
    stage: str
    batch: int
    super_batch: int
    bytes_moved: float
    ops_done: float

    def line(self) -> str:
        return (f"{self.start:.6f} {self.end:.6f} {self.role} {self.stage} "
                f"{self.batch} {self.super_batch}")


@dataclass
class ScheduleTrace:
    events: list = field(default_factory=list)

    def makespan(self) -> float:
        return max((e.end for e in self.events), default=0.0)

    def by_role(self, role: str) -> list:
        return [e for e in self.events if e.role == role]


@dataclass
class SimResult:
    trace: ScheduleTrace
    utilization: dict
    makespan: float
    memory_high_water: dict

    def idle_time(self, role: str) -> float:
        busy = sum(e.end - e.start for e in self.trace.by_role(role))
        return max(0.0, self.makespan - busy)


def task_duration(task: SimTask, devices: dict, link: LinkModel) -> float:
    dev = devices[task.role]
    dur = task.work / dev.rate(task.kind) if task.work else 0.0
    if task.bytes_moved:
        dur += task.bytes_moved / link.bandwidth + link.latency
    return dur


def contention_model(demands: list[float], rate: float,
                     weights: list[float] | None = None) -> list[float]:
    """Effective rates for tasks co-resident on one role.

    Equal share by default, or proportional to ``weights``. Conservation
    holds: finishing co-resident equal tasks at shared rates takes exactly as
    long as running them back to back at full rate.
    """
    n = len(demands)
    if n == 0:
        return []
    if weights is None:
        weights = [1.0] * n
    total = sum(weights)
    return [rate * w / total for w in weights]


def simulate(tasks: list[SimTask], devices: dict, link: LinkModel) -> SimResult:
    """List-schedule the task DAG: earliest-start order, FIFO tie-break.

    Raises :class:`SimulatedOOM` when a role's tracked memory exceeds its
    capacity, naming the first violating task in schedule order.
    """
    by_name = {}
    for t in tasks:
        if t.name in by_name:
            raise SimError(f"duplicate task name {t.name!r}")
        if t.role not in devices:
            raise SimError(f"task {t.name!r} targets unknown role {t.role!r}")
        by_name[t.name] = t
    for t in tasks:
        for d in t.deps:
            if d not in by_name:
                raise SimError(f"task {t.name!r} depends on unknown {d!r}")

    submission = {t.name: i for i, t in enumerate(tasks)}
    end_time: dict[str, float] = {}
    role_avail = {r: 0.0 for r in devices}
    role_busy = {r: 0.0 for r in devices}
    role_mem = {r: 0.0 for r in devices}
    mem_high = {r: 0.0 for r in devices}
    unscheduled = set(by_name)
    events: list[TraceEvent] = []

    while unscheduled:
        best = None
        best_key = None
        for name in unscheduled:
            t = by_name[name]
            if any(d not in end_time for d in t.deps):
                continue
            ready = max((end_time[d] for d in t.deps), default=0.0)
            start = max(ready, role_avail[t.role])
            key = (start, submission[name])
            if best_key is None or key < best_key:
                best_key = key
                best = t
        if best is None:
            raise SimError("dependency cycle detected in task DAG")
        start = best_key[0]
        dur = task_duration(best, devices, link)
        end = start + dur
        role_avail[best.role] = end
        role_busy[best.role] += dur
        end_time[best.name] = end
        unscheduled.remove(best.name)

        role_mem[best.role] += best.mem_hold + best.mem_persist
        if role_mem[best.role] > mem_high[best.role]:
            mem_high[best.role] = role_mem[best.role]
        if role_mem[best.role] > devices[best.role].memory_capacity:
            raise SimulatedOOM(best.name, best.role, best.stage,
                               role_mem[best.role],
                               devices[best.role].memory_capacity)
        role_mem[best.role] -= best.mem_hold

        events.append(TraceEvent(
            start=start, end=end, role=best.role, stage=best.stage,
            batch=best.batch, super_batch=best.super_batch,
            bytes_moved=best.bytes_moved, ops_done=best.work,
        ))

    events.sort(key=lambda e: (e.start, e.role, e.batch))
    trace = ScheduleTrace(events=events)
    makespan = trace.makespan()
    util = {
        r: (role_busy[r] / makespan if makespan > 0 else 0.0)
        for r in devices
    }
    return SimResult(trace=trace, utilization=util, makespan=makespan,
                     memory_high_water=mem_high)
