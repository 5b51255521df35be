import json
import math
from fractions import Fraction

import pytest

from spectralcorr.serialize import csv_text, dumps, fmt_float


def test_fmt_float_17_digits():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert float(fmt_float(math.pi)) == math.pi
    assert fmt_float(float("inf")) == "Infinity" and fmt_float(float("nan")) == "NaN"


def test_dumps_round_trip_and_order():
    obj = {"b": 1, "a": [0.1, 2, "x"], "f": Fraction(2, 3), "n": None, "t": True, "e": {}}
    text = dumps(obj)
    back = json.loads(text)
    assert list(back) == ["b", "a", "f", "n", "t", "e"]
    assert back["a"][0] == 0.1 and back["f"] == "2/3" and back["t"] is True
    assert text == dumps(obj) and text.endswith("\n")


def test_dumps_to_dict_and_errors():
    class Thing:
        def to_dict(self):
            return {"x": 1.5}

    assert json.loads(dumps([Thing()])) == [{"x": 1.5}]
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_csv_text():
    text = csv_text(["a", "b"], [(1, 0.1), ("x,y", 2.0)])
    assert text == 'a,b\n1,0.10000000000000001\n"x,y",2\n'
    assert csv_text(["a"], []) == "a\n"
