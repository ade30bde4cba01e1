import pytest

from epimachine.codec import encode

from helpers import two_marks_config, load


@pytest.fixture(scope="session")
def flip_machine():
    """The two-state bit-flip machine and its marked-tape configuration."""
    spec, _ = load("flip")
    return spec, two_marks_config(spec)


@pytest.fixture(scope="session")
def flip_encoded(flip_machine):
    spec, config = flip_machine
    return encode(config, spec.states)
