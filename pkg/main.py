import sys
from pathlib import Path
import logging

# Add project directory to the import path
PROJECT_DIR = Path(__file__).resolve().parent
if str(PROJECT_DIR) not in sys.path:
    sys.path.append(str(PROJECT_DIR))

import typer

from config import settings
from routers import approx, check, corollary, model, suite, sweep, tilt

# Configure logging
logging.basicConfig(
    level=logging.DEBUG if settings.DEBUG else settings.LOG_LEVEL,
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)
logger = logging.getLogger("main")

app = typer.Typer(
    name=settings.APP_NAME,
    help="Local limit theorem toolkit for lattice random walks",
    add_completion=False,
    no_args_is_help=True,
)


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging")):
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.debug("Debug logging enabled")


# Register commands
app.command("check")(check.cmd_check)
app.command("model")(model.cmd_model)
app.command("approx")(approx.cmd_approx)
app.command("sweep")(sweep.cmd_sweep)
app.command("tilt")(tilt.cmd_tilt)
app.command("corollary")(corollary.cmd_corollary)
app.command("suite")(suite.cmd_suite)


if __name__ == "__main__":
    app()
