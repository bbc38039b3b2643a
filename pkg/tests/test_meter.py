import time

import pytest

from minutemeta.errors import ConfigError
from minutemeta.evaluation import MeterAccumulator, ResourceMeter, measure


class TestArithmetic:
    def test_one_hour_at_100w(self):
        meter = ResourceMeter(carbon_intensity=0.5, average_watts=100.0)
        report = meter.report_for(wall_seconds=3600.0)
        assert report.energy_kwh == pytest.approx(0.1, abs=0.0)
        assert report.kg_co2e == pytest.approx(0.05, abs=0.0)

    def test_measured_energy_priced_exactly(self):
        meter = ResourceMeter(carbon_intensity=0.4)
        report = meter.report_for(wall_seconds=10.0, energy_kwh=0.002)
        assert report.kg_co2e == pytest.approx(0.0008)
        assert report.source == "measured_counters"

    def test_intensity_required_positive(self):
        with pytest.raises(ConfigError):
            ResourceMeter(carbon_intensity=0.0)
        with pytest.raises(ConfigError):
            ResourceMeter(carbon_intensity=-1.0)


class TestMeasure:
    def test_zero_duration_thunk(self):
        meter = ResourceMeter(carbon_intensity=0.5, average_watts=100.0)
        result, report = measure(meter, lambda: 42)
        assert result == 42
        assert report.wall_seconds < 0.5
        assert report.energy_kwh < 100.0 * 0.5 / 3600.0 / 1000.0

    def test_wall_time_tracks_sleep(self):
        meter = ResourceMeter(carbon_intensity=0.5, average_watts=50.0)
        _, report = measure(meter, lambda: time.sleep(0.2))
        assert report.wall_seconds == pytest.approx(0.2, abs=0.1)

    def test_additive_composition(self):
        meter = ResourceMeter(carbon_intensity=0.5, average_watts=80.0,
                              prefer_counters=False)

        def work():
            time.sleep(0.15)

        _, first = measure(meter, work)
        _, second = measure(meter, work)
        _, combined = measure(meter, lambda: (work(), work()))
        total = first.energy_kwh + second.energy_kwh
        assert combined.energy_kwh == pytest.approx(total, rel=0.02)
        assert combined.wall_seconds == pytest.approx(
            first.wall_seconds + second.wall_seconds, rel=0.02
        )


class TestAccumulator:
    def test_totals_and_per_item(self):
        meter = ResourceMeter(carbon_intensity=0.5, average_watts=100.0)
        acc = MeterAccumulator(meter)
        acc.add("doc1", meter.report_for(3600.0))
        acc.add("doc2", meter.report_for(3600.0))
        total = acc.total()
        assert total.energy_kwh == pytest.approx(0.2)
        assert total.kg_co2e == pytest.approx(0.1)
        assert len(total.per_item) == 2
