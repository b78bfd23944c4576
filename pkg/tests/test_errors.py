import pickle

import pytest

from bubblelab.core.errors import (
    CODE_BUBBLES_NOT_SEPARATED,
    CODE_FIELD_BLOW_UP,
    CODE_INSUFFICIENT_DATA,
    CODE_NOT_NEAR_MANIFOLD,
    CODE_UNKNOWN_EXPERIMENT,
    FatalError,
    NumericalError,
    RecoverableError,
    RetriableError,
    error_from_code,
    get_error_behavior,
)


@pytest.mark.parametrize(
    "code, cls",
    [
        (CODE_BUBBLES_NOT_SEPARATED, FatalError),
        (CODE_UNKNOWN_EXPERIMENT, FatalError),
        (CODE_NOT_NEAR_MANIFOLD, RecoverableError),
        (CODE_FIELD_BLOW_UP, RetriableError),
    ],
)
def test_error_from_code(code, cls):
    err = error_from_code(code, "boom")
    assert type(err) is cls
    assert err.code == code
    assert str(err) == f"[{code}] boom"


def test_uncategorized_code_is_plain_numerical_error():
    err = error_from_code(CODE_INSUFFICIENT_DATA, "too few samples")
    assert type(err) is NumericalError


def test_errors_survive_pickling():
    err = error_from_code(CODE_FIELD_BLOW_UP, "u_t exceeded threshold")
    back = pickle.loads(pickle.dumps(err))
    assert type(back) is RetriableError
    assert (back.code, back.message) == (err.code, err.message)


def test_error_behavior_labels():
    assert get_error_behavior(CODE_UNKNOWN_EXPERIMENT) == "fatal"
    assert get_error_behavior(CODE_FIELD_BLOW_UP) == "retriable"
    assert get_error_behavior(CODE_INSUFFICIENT_DATA) == "normal"
