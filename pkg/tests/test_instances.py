import json

import pytest

from adasub import (
    CardinalityConstraint,
    ParseError,
    ValidationError,
    check_adaptive_monotone,
    check_adaptive_submodular,
    generate_coverage,
    load_instance,
    optimal_value,
    save_instance,
)
from adasub.instances import dumps_instance, loads_instance


class TestGeneration:
    def test_deterministic_bytes(self):
        a = dumps_instance(generate_coverage(6, 2, 8, 0.3, seed=42))
        b = dumps_instance(generate_coverage(6, 2, 8, 0.3, seed=42))
        assert a == b

    def test_different_seeds_differ(self):
        a = dumps_instance(generate_coverage(6, 2, 8, 0.3, seed=1))
        b = dumps_instance(generate_coverage(6, 2, 8, 0.3, seed=2))
        assert a != b

    def test_density_zero_is_worthless(self):
        inst = generate_coverage(4, 2, 6, 0.0, seed=0, k=2)
        res = optimal_value(inst.utility(), inst.prior, inst.constraint)
        assert res.value == pytest.approx(0.0)

    def test_density_one_single_item_covers_everything(self):
        inst = generate_coverage(4, 2, 6, 1.0, seed=0, k=1)
        res = optimal_value(inst.utility(), inst.prior, inst.constraint)
        total = sum(inst.utility_spec["weights"])
        assert res.value == pytest.approx(total)

    def test_bad_density_rejected(self):
        with pytest.raises(ValidationError):
            generate_coverage(4, 2, 6, 1.5, seed=0)

    def test_generated_instances_are_adaptive_submodular(self):
        for seed in (0, 1, 2):
            inst = generate_coverage(5, 2, 6, 0.3, seed=seed)
            assert check_adaptive_monotone(inst.utility(), inst.prior).passed
            assert check_adaptive_submodular(inst.utility(), inst.prior).passed


class TestSerialization:
    def test_round_trip_bytes(self, tmp_path):
        inst = generate_coverage(6, 2, 8, 0.3, seed=7, k=3)
        path = tmp_path / "inst.json"
        save_instance(inst, path)
        text = path.read_text()
        save_instance(load_instance(path), path)
        assert path.read_text() == text

    def test_round_trip_fields(self, tmp_path):
        inst = generate_coverage(5, 3, 6, 0.4, seed=9,
                                 groups=[[0, 1], [2, 3, 4]], limits=[1, 2])
        path = tmp_path / "inst.json"
        save_instance(inst, path)
        back = load_instance(path)
        assert back.n == inst.n and back.m == inst.m
        assert back.prior.probs == inst.prior.probs
        assert back.utility_spec == inst.utility_spec
        assert back.constraint == inst.constraint

    def test_missing_prior_is_parse_error(self):
        d = json.loads(dumps_instance(generate_coverage(3, 2, 4, 0.3, seed=0)))
        del d["prior"]
        with pytest.raises(ParseError):
            loads_instance(json.dumps(d))

    def test_bad_normalization_is_validation_error(self):
        d = json.loads(dumps_instance(generate_coverage(3, 2, 4, 0.3, seed=0)))
        d["prior"]["probs"][0] = [0.5, 0.4]
        with pytest.raises(ValidationError):
            loads_instance(json.dumps(d))

    def test_invalid_json(self):
        with pytest.raises(ParseError):
            loads_instance("{not json")

    def test_coverage_element_bounds_checked(self):
        d = json.loads(dumps_instance(generate_coverage(3, 2, 4, 0.3, seed=0)))
        d["utility"]["covers"][0][0] = [99]
        with pytest.raises(ValidationError):
            loads_instance(json.dumps(d))

    def test_cardinality_constraint_round_trip(self, tmp_path):
        inst = generate_coverage(4, 2, 4, 0.3, seed=3, k=2)
        assert inst.constraint == CardinalityConstraint(2)
        path = tmp_path / "c.json"
        save_instance(inst, path)
        assert load_instance(path).constraint == CardinalityConstraint(2)
