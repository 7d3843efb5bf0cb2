import pytest

from harshnet.envgen import generate_dataset, split
from harshnet.harness.experiment import compare_on
from harshnet.harness.scenario import default_scenario
from harshnet.predictor import train


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()


@pytest.fixture(scope="session")
def dataset(scenario):
    return generate_dataset(scenario.dataset_size, scenario.dataset_seed)


@pytest.fixture(scope="session")
def splits(dataset, scenario):
    return split(dataset, scenario.train_fraction, scenario.split_seed)


@pytest.fixture(scope="session")
def trained(splits, scenario):
    """Model and loss history from the default 50-epoch run (about 20 s)."""
    return train(splits[0], scenario.hyper, scenario.train_seed)


@pytest.fixture(scope="session")
def report(trained, splits, scenario):
    model, history = trained
    return compare_on(scenario, model, splits[1], history)


ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(number: int, name: str, ok: bool, detail: str):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {name} ({detail})"
        ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
