"""Flask application factory.

The application hosts the analysis commands on the ``flask`` command line
(``flask --app lossmodes spectrum --example circuit``) and carries the
layered configuration: built-in defaults, then the instance ``config.py``,
or a test mapping when one is given.
"""


import logging

from flask import Flask

from lossmodes.models.components.tolerances import DEFAULT_TOLERANCES


def create_app(test_config: dict | None = None) -> Flask:
    """Build the app that carries the analysis commands.

    Defaults cover the schema version, the log level, the integration step
    limit ``MAX_INTEGRATION_STEPS`` and one ``TOL_*`` key per tolerance.
    ``instance/config.py`` overrides them unless ``test_config`` is given.

    Parameters
    ----------
    test_config: dict | None (default None)
        Settings applied instead of the instance file, e.g.
        ``{"TESTING": True, "TOL_OVERDAMPED": 1e-6}``.

    Returns
    -------
    Flask
    """
    app = Flask(__name__, instance_relative_config=True)
    app.config.from_mapping(
        SCHEMA_VERSION="1.0",
        LOG_LEVEL="WARNING",
        MAX_INTEGRATION_STEPS=2_000_000,
        **{key: value for key, value in zip(
            DEFAULT_TOLERANCES.config_keys(),
            DEFAULT_TOLERANCES.as_dict().values())},
    )

    if test_config is None:
        # Instance configuration is optional.
        app.config.from_pyfile('config.py', silent=True)
    else:
        app.config.from_mapping(test_config)

    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(__name__).setLevel(app.config["LOG_LEVEL"])

    from . import cli
    cli.init_app(app)

    return app
