import math

import pytest

from utils.logging import ROOT_LOGGER_NAME, get_logger
from utils.validators import (
    validate_choice,
    validate_non_negative_int,
    validate_positive_float,
    validate_positive_int,
    validate_unit_interval,
)


class TestValidators:
    @pytest.mark.parametrize("value, ok", [(1, True), (40, True), (0, False), (-3, False), (True, False), (2.0, False)])
    def test_positive_int(self, value, ok):
        assert validate_positive_int(value, "batch")[0] is ok

    def test_messages_name_the_field(self):
        assert validate_positive_int(0, "batch") == (False, "batch must be at least 1, got: 0")
        assert validate_non_negative_int(-1, "asc_layers")[1].startswith("asc_layers")

    @pytest.mark.parametrize("value, ok", [(0.5, True), (3, True), (0.0, False), (-1e-9, False), (math.inf, False), (math.nan, False)])
    def test_positive_float(self, value, ok):
        assert validate_positive_float(value, "lr")[0] is ok

    @pytest.mark.parametrize("value, include_one, ok", [
        (0.0, False, True),
        (0.99, False, True),
        (1.0, False, False),
        (1.0, True, True),
        (-0.1, True, False),
        ("0.5", False, False),
    ])
    def test_unit_interval(self, value, include_one, ok):
        assert validate_unit_interval(value, "dropout", include_one=include_one)[0] is ok

    def test_choice(self):
        assert validate_choice("majority", "strategy", ("first-token", "majority")) == (True, None)
        is_valid, message = validate_choice("vote", "strategy", ("first-token", "majority"))
        assert not is_valid and "'first-token', 'majority'" in message


class TestLogging:
    def test_module_loggers_share_the_root(self):
        assert get_logger("training.trainer").name == f"{ROOT_LOGGER_NAME}.training.trainer"
        assert get_logger(f"{ROOT_LOGGER_NAME}.model").name == f"{ROOT_LOGGER_NAME}.model"
