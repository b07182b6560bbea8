import json

import pytest
from loguru import logger

from profiles import classical_membrane
from spectra import make_spectrum


@pytest.fixture
def classical2():
    return classical_membrane(2)


@pytest.fixture
def one_two():
    return make_spectrum([1.0, 2.0])


@pytest.fixture
def write_spectrum(tmp_path):
    def _write(values, name='spectrum.json', **extra):
        path = tmp_path / name
        path.write_text(json.dumps({'eigenvalues': list(values), **extra}))
        return str(path)
    return _write


@pytest.fixture(autouse=True)
def quiet_logger():
    # sinks added by the CLI point at the captured stderr of one test only
    yield
    logger.remove()
