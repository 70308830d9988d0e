import os

ATOM_CAP_ENV = "SFGKAT_MAX_TESTS"
DEFAULT_MAX_TESTS = 16
# guard against implementation bugs; real derivative closures stay far below this
MAX_STATES = 100_000


def max_tests() -> int:
    raw = os.environ.get(ATOM_CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_TESTS
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_MAX_TESTS
    return max(0, value)
