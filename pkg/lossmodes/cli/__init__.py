"""Command line front end."""


from flask import Flask

from lossmodes.cli.commands import COMMANDS


def init_app(app: Flask):
    """Register the cli commands with the flask app."""
    for command in COMMANDS:
        app.cli.add_command(command)
