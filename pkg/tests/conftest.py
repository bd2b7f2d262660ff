import os

import pytest

from loopind import create_app
from loopind.curve import circle, ellipse, harmonic_knot
from loopind.quadrature import QuadratureSpec

CURVES_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'curves')


@pytest.fixture
def app():
    """Create and configure a new app instance for each test."""
    app = create_app('testing')
    with app.app_context():
        yield app


@pytest.fixture
def client(app):
    """A test client for the app."""
    return app.test_client()


@pytest.fixture
def runner(app):
    """A test runner for the app's Click commands."""
    return app.test_cli_runner()


@pytest.fixture
def spec():
    """Default quadrature settings."""
    return QuadratureSpec()


@pytest.fixture
def unit_circle():
    return circle(1.0)


@pytest.fixture
def sample_ellipse():
    return ellipse(2.0, 1.0)


@pytest.fixture
def trefoil():
    return harmonic_knot()


@pytest.fixture
def curves_dir():
    return CURVES_DIR


@pytest.fixture
def curve_file():
    """Path of a shipped curve spec."""

    def _path(name):
        return os.path.join(CURVES_DIR, name)

    return _path
