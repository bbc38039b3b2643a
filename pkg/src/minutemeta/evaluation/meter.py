"""Wall-time, energy, and carbon accounting for measured computations.

Energy comes from hardware counters when the platform exposes them (Linux
RAPL under /sys/class/powercap), otherwise from a configured average power
draw integrated over wall time. Carbon intensity (kg CO2e per kWh) has no
default: it is region-dependent and must be supplied.
"""
from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from minutemeta.errors import ConfigError, MeterUnavailable

logger = logging.getLogger(__name__)

RAPL_ROOT = Path("/sys/class/powercap")
JOULES_PER_KWH = 3_600_000.0


@dataclass
class ResourceReport:
    wall_seconds: float
    energy_kwh: float
    kg_co2e: float
    source: str = "configured_watts"
    per_item: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        data = {
            "wall_seconds": self.wall_seconds,
            "energy_kWh": self.energy_kwh,
            "kg_CO2e": self.kg_co2e,
            "source": self.source,
        }
        if self.per_item:
            data["per_item"] = self.per_item
        return data

    def __add__(self, other: "ResourceReport") -> "ResourceReport":
        return ResourceReport(
            wall_seconds=self.wall_seconds + other.wall_seconds,
            energy_kwh=self.energy_kwh + other.energy_kwh,
            kg_co2e=self.kg_co2e + other.kg_co2e,
            source=self.source if self.source == other.source else "mixed",
            per_item=[*self.per_item, *other.per_item],
        )


def _rapl_energy_uj() -> int | None:
    """Total microjoules across RAPL packages, or None when unsupported."""
    if not RAPL_ROOT.exists():
        return None
    total = 0
    found = False
    for node in RAPL_ROOT.glob("intel-rapl:*"):
        counter = node / "energy_uj"
        try:
            total += int(counter.read_text())
            found = True
        except (OSError, ValueError):
            continue
    return total if found else None


@dataclass
class ResourceMeter:
    """Samples power while a thunk runs and prices the energy in CO2e.

    ``carbon_intensity`` is kg CO2e per kWh and required. ``average_watts``
    is the fallback power model when no counters exist.
    """

    carbon_intensity: float
    average_watts: float = 65.0
    sampling_interval: float = 0.1
    prefer_counters: bool = True

    def __post_init__(self):
        if self.carbon_intensity <= 0:
            raise ConfigError("carbon_intensity must be positive (kg CO2e per kWh)")
        if self.sampling_interval <= 0:
            raise ConfigError("sampling_interval must be positive")
        if self.average_watts <= 0:
            raise ConfigError("average_watts must be positive")

    def counters_available(self) -> bool:
        return _rapl_energy_uj() is not None

    def _counters_or_raise(self) -> int:
        value = _rapl_energy_uj()
        if value is None:
            raise MeterUnavailable("no RAPL energy counters on this platform")
        return value

    def report_for(self, wall_seconds: float, energy_kwh: float | None = None,
                   source: str | None = None) -> ResourceReport:
        """Price a known duration (and optionally measured energy)."""
        if energy_kwh is None:
            energy_kwh = self.average_watts * wall_seconds / 3600.0 / 1000.0
            source = source or "configured_watts"
        else:
            source = source or "measured_counters"
        return ResourceReport(
            wall_seconds=wall_seconds,
            energy_kwh=energy_kwh,
            kg_co2e=energy_kwh * self.carbon_intensity,
            source=source,
        )

    def measure(self, thunk):
        """Run ``thunk()`` and return (result, ResourceReport)."""
        start_uj: int | None = None
        if self.prefer_counters:
            try:
                start_uj = self._counters_or_raise()
            except MeterUnavailable as exc:
                logger.warning(
                    "%s; falling back to configured %.1f W", exc, self.average_watts
                )
        start = time.perf_counter()
        result = thunk()
        wall = time.perf_counter() - start
        if start_uj is not None:
            end_uj = _rapl_energy_uj()
            if end_uj is not None and end_uj >= start_uj:
                energy_kwh = (end_uj - start_uj) / 1e6 / JOULES_PER_KWH
                return result, self.report_for(wall, energy_kwh)
            # Counter vanished or wrapped mid-run; fall back.
        return result, self.report_for(wall)


def measure(meter: ResourceMeter, thunk):
    """Module-level convenience wrapper around ``meter.measure``."""
    return meter.measure(thunk)


class MeterAccumulator:
    """Thread-safe aggregation of per-item reports into one batch report."""

    def __init__(self, meter: ResourceMeter):
        self.meter = meter
        self._lock = threading.Lock()
        self._items: list[dict] = []
        self._wall = 0.0
        self._energy = 0.0

    def add(self, key: str, report: ResourceReport) -> None:
        with self._lock:
            self._items.append({"key": key, **report.as_dict()})
            self._wall += report.wall_seconds
            self._energy += report.energy_kwh

    def total(self) -> ResourceReport:
        with self._lock:
            return ResourceReport(
                wall_seconds=self._wall,
                energy_kwh=self._energy,
                kg_co2e=self._energy * self.meter.carbon_intensity,
                source="aggregated",
                per_item=list(self._items),
            )
