import logging
import sys
from typing import Optional, Union

from flasgger import Swagger
from flask import Flask

from config import get_config

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level: Union[str, int] = 'INFO') -> logging.Logger:
    """Route package logs to stderr so stdout stays byte-stable"""
    logger = logging.getLogger('loopind')
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO
    logger.setLevel(level)
    if not any(getattr(h, '_loopind', False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._loopind = True  # type: ignore[attr-defined]
        logger.addHandler(handler)
    return logger


def create_app(config_name: Optional[str] = None) -> Flask:
    app = Flask(__name__)
    cfg = get_config(config_name)
    if hasattr(cfg, 'validate'):
        cfg.validate()
    app.config.from_object(cfg)
    configure_logging(app.config['LOG_LEVEL'])

    swagger_template = {
        "swagger": "2.0",
        "info": {
            "title": "Loop Inductance API",
            "description": "Neumann/Weber mutual inductance and regularized self-inductance",
            "version": "1.0.0"
        }
    }
    Swagger(app, template=swagger_template)

    from loopind.routes import api_bp, register_error_handlers
    app.register_blueprint(api_bp, url_prefix='/api')
    register_error_handlers(app)

    from loopind.cli import main
    app.cli.add_command(main, 'loopind')

    return app
