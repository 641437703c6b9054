"""Device model presets for the cost simulator.

The paper-like preset is calibrated so that, on the shipped power-law
workload, stage-time ratios echo the published runtime breakdowns (slow-role
sample+gather comparable to fast-role training, fast sampling an order of
magnitude quicker than slow). The absolute rates are estimates; only the
resulting orderings are asserted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .devsim import ROLE_FAST, ROLE_SLOW, DeviceModel, LinkModel


@dataclass(frozen=True)
class DevicePreset:
    name: str
    devices: dict
    link: LinkModel
    cache_budget_bytes: float

    @property
    def fast(self) -> DeviceModel:
        return self.devices[ROLE_FAST]

    @property
    def slow(self) -> DeviceModel:
        return self.devices[ROLE_SLOW]


def paper_like_preset() -> DevicePreset:
    """Two-device preset shaped after the published stage-time ratios.

    Calibrated on the shipped power-law workload (batch 16, fanouts 10/5/5,
    feature dim 64) so that one fast-role training batch takes about one
    simulated second, slow-role sample+gather together take ~1.3x that, and
    fast-role sampling runs an order of magnitude quicker than slow-role.
    """
    return DevicePreset(
        name="paper-like",
        devices={
            ROLE_SLOW: DeviceModel(
                compute_rate=4.3e6,
                sample_rate=1.65e4,
                gather_rate=8.8e2,
                memory_capacity=1e9,
            ),
            ROLE_FAST: DeviceModel(
                compute_rate=4.3e6,
                sample_rate=1.65e5,
                gather_rate=4.3e3,
                memory_capacity=2e6,
            ),
        },
        link=LinkModel(bandwidth=1.03e6, latency=1e-4),
        cache_budget_bytes=2.0e5,
    )


def uniform_preset(rate: float = 1.0e9, memory: float = 1e12) -> DevicePreset:
    """Degenerate preset for tests that want cost-free scheduling."""
    dev = DeviceModel(compute_rate=rate, sample_rate=rate, gather_rate=rate,
                      memory_capacity=memory)
    return DevicePreset(
        name="uniform",
        devices={ROLE_SLOW: dev, ROLE_FAST: dev},
        link=LinkModel(bandwidth=rate, latency=0.0),
        cache_budget_bytes=0.0,
    )
