import pytest


@pytest.fixture
def announce(capsys):
    """Print one line past pytest's capture so it lands in the run log."""

    def say(line: str):
        with capsys.disabled():
            print("\n" + line)

    return say
