import json
import math

import pytest

from loopind.oracles import circle_self_inductance, maxwell_coaxial

CIRCLE = {'kind': 'circle', 'params': {'radius': 1.0}}
UPPER = {'kind': 'circle', 'params': {'radius': 1.0}, 'transform': {'origin': [0, 0, 1]}}


class TestCurveAPI:
    """Test curve endpoints."""

    def test_list_kinds(self, client):
        """Test listing curve kinds."""
        response = client.get('/api/curves/kinds')

        assert response.status_code == 200
        data = json.loads(response.data)
        assert data['result'] is True
        assert {item['kind'] for item in data['kinds']} >= {'circle', 'helix', 'offset'}

    def test_describe_curve(self, client):
        """Test describing a circle."""
        response = client.post('/api/curves/describe', json=CIRCLE)

        assert response.status_code == 200
        data = json.loads(response.data)
        assert data['curve']['length'] == pytest.approx(2 * math.pi)
        assert data['curve']['curvature_sq_integral'] == pytest.approx(2 * math.pi)

    def test_describe_invalid_curve(self, client):
        """Test describing an invalid curve spec."""
        response = client.post('/api/curves/describe', json={'kind': 'spiral'})

        assert response.status_code == 400
        data = json.loads(response.data)
        assert data['result'] is False
        assert data['error_type'] == 'INVALID_CURVE'

    def test_body_must_be_json(self, client):
        """Test request without a JSON body."""
        response = client.post('/api/curves/describe', data='circle')

        assert response.status_code == 400
        assert json.loads(response.data)['error_type'] == 'BAD_REQUEST'


class TestInductanceAPI:
    """Test inductance endpoints."""

    def test_self_inductance_hadamard(self, client):
        """Test Hadamard self-inductance of the unit circle."""
        response = client.post('/api/inductance/self', json={'curve': CIRCLE})

        assert response.status_code == 200
        data = json.loads(response.data)
        assert data['result'] is True
        result = data['inductance']
        assert result['method'] == 'hadamard'
        assert result['value'] == pytest.approx(circle_self_inductance(), rel=1e-6)
        assert len(result['schedule']) == 6

    def test_self_inductance_weber_si(self, client):
        """Test Weber form in SI units."""
        response = client.post(
            '/api/inductance/self',
            json={
                'curve': CIRCLE,
                'form': 'weber',
                'units': 'si',
                'schedule': [0.2, 0.1, 0.05, 0.025]
            }
        )

        assert response.status_code == 200
        result = json.loads(response.data)['inductance']
        assert result['units'] == 'si'
        expected = circle_self_inductance(1.0, 'weber', 'si')
        assert result['value'] == pytest.approx(expected, rel=1e-5)

    def test_self_inductance_missing_curve(self, client):
        """Test self-inductance without a curve."""
        response = client.post('/api/inductance/self', json={'form': 'neumann'})

        assert response.status_code == 400
        data = json.loads(response.data)
        assert data['result'] is False
        assert data['error_type'] == 'BAD_REQUEST'

    def test_self_inductance_unknown_method(self, client):
        """Test self-inductance with an unknown method."""
        response = client.post('/api/inductance/self', json={'curve': CIRCLE, 'method': 'zeta'})

        assert response.status_code == 400

    def test_self_inductance_unknown_form(self, client):
        """Test self-inductance with an unknown form."""
        response = client.post('/api/inductance/self', json={'curve': CIRCLE, 'form': 'maxwell'})

        assert response.status_code == 400
        assert json.loads(response.data)['error_type'] == 'BAD_REQUEST'

    def test_self_inductance_short_schedule(self, client):
        """Test a schedule too short to fit."""
        response = client.post(
            '/api/inductance/self', json={'curve': CIRCLE, 'schedule': [0.1, 0.05]}
        )

        assert response.status_code == 422
        assert json.loads(response.data)['error_type'] == 'FIT_ERROR'

    def test_mutual_inductance(self, client):
        """Test mutual inductance of coaxial circles."""
        response = client.post('/api/inductance/mutual', json={'curves': [CIRCLE, UPPER]})

        assert response.status_code == 200
        data = json.loads(response.data)
        assert data['value'] == pytest.approx(maxwell_coaxial(1.0, 1.0, 1.0), rel=1e-6)
        assert data['form'] == 'neumann'

    def test_mutual_inductance_same_curve(self, client):
        """Test mutual inductance of a loop with itself."""
        response = client.post('/api/inductance/mutual', json={'curves': [CIRCLE, CIRCLE]})

        assert response.status_code == 400
        assert json.loads(response.data)['error_type'] == 'PROXIMITY'

    def test_mutual_inductance_one_curve(self, client):
        """Test mutual inductance with one curve."""
        response = client.post('/api/inductance/mutual', json={'curves': [CIRCLE]})

        assert response.status_code == 400


class TestSolenoidAPI:
    """Test solenoid endpoint."""

    def test_solenoid(self, client):
        """Test closed form and oracle agree."""
        response = client.post('/api/solenoid', json={'radius': 1.0, 'length': 2.0})

        assert response.status_code == 200
        data = json.loads(response.data)
        assert data['closed_form'] == pytest.approx(54.36, rel=1e-3)
        assert data['oracle'] == pytest.approx(data['closed_form'], rel=1e-5)
        assert data['asymptotic'] < data['closed_form']

    def test_solenoid_bad_radius(self, client):
        """Test solenoid with a non-numeric radius."""
        response = client.post('/api/solenoid', json={'radius': 'one', 'length': 2.0})

        assert response.status_code == 400

    def test_solenoid_negative_length(self, client):
        """Test solenoid with a negative length."""
        response = client.post('/api/solenoid', json={'radius': 1.0, 'length': -2.0})

        assert response.status_code == 400
        assert json.loads(response.data)['error_type'] == 'DOMAIN_ERROR'

    @pytest.mark.parametrize(
        'body',
        ['{"radius": NaN, "length": 2.0}', '{"radius": 1.0, "length": Infinity}'],
    )
    def test_solenoid_non_finite(self, client, body):
        """Test solenoid rejects NaN and infinite inputs."""
        response = client.post('/api/solenoid', data=body, content_type='application/json')

        assert response.status_code == 400
        data = json.loads(response.data)
        assert data['result'] is False
        assert data['error_type'] == 'BAD_REQUEST'


def test_not_found(client):
    response = client.get('/api/nothing')

    assert response.status_code == 404
    assert json.loads(response.data)['error_type'] == 'NOT_FOUND'
