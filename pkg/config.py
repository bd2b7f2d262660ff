import os
from typing import Optional, Type

from dotenv import load_dotenv

load_dotenv()


def _env_float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


class Config:
    SECRET_KEY = os.environ.get('SECRET_KEY') or 'dev-secret-key-change-in-production'
    JSON_SORT_KEYS = False

    # Quadrature
    QUADRATURE_ORDER = _env_int('QUADRATURE_ORDER', 16)
    PANELS_PER_UNIT_ARCLENGTH = _env_float('PANELS_PER_UNIT_ARCLENGTH', 8.0)
    GRADING_FACTOR = _env_float('GRADING_FACTOR', 2.0)
    GRADING_LAYERS = _env_int('GRADING_LAYERS', 6)
    ABS_TOL = _env_float('ABS_TOL', 1e-12)
    REL_TOL = _env_float('REL_TOL', 1e-8)

    # Regularization
    CONTINUATION_FIT_DEGREE = _env_int('CONTINUATION_FIT_DEGREE', 3)
    COUNTER_TERM_TOL = _env_float('COUNTER_TERM_TOL', 0.01)
    EXTRAPOLATION_TOL = _env_float('EXTRAPOLATION_TOL', 0.01)
    SEPARATION_SAMPLES = _env_int('SEPARATION_SAMPLES', 2048)

    # Output
    UNITS = os.environ.get('UNITS', 'reduced')
    OUTPUT_FORMAT = os.environ.get('OUTPUT_FORMAT', 'csv')
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')

    SWAGGER = {
        'title': 'Loop Inductance API',
        'uiversion': 3,
        'specs_route': '/api/docs/',
        'static_url_path': '/flasgger_static',
        'swagger_ui': True,
        'description': 'Mutual and regularized self-inductance of space curves',
        'version': '1.0.0',
        'license': {
            'name': 'MIT',
            'url': 'https://opensource.org/licenses/MIT'
        }
    }


class DevelopmentConfig(Config):
    DEBUG = True
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'DEBUG')


class TestingConfig(Config):
    TESTING = True
    # coarser separation grid keeps the suite quick; quadrature stays at defaults
    SEPARATION_SAMPLES = 512


class ProductionConfig(Config):
    DEBUG = False
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'WARNING')

    @classmethod
    def validate(cls) -> None:
        if not 2 <= cls.QUADRATURE_ORDER <= 64:
            raise ValueError("QUADRATURE_ORDER must be between 2 and 64")
        if cls.ABS_TOL <= 0 or cls.REL_TOL <= 0:
            raise ValueError("ABS_TOL and REL_TOL must be positive")
        if cls.PANELS_PER_UNIT_ARCLENGTH <= 0:
            raise ValueError("PANELS_PER_UNIT_ARCLENGTH must be positive")


config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
    'default': DevelopmentConfig
}


def get_config(name: Optional[str] = None) -> Type[Config]:
    env = name or os.environ.get('LOOPIND_ENV', 'development')
    return config.get(env, config['default'])
