import os
import sys

from tqdm import tqdm


BANNER = "#-------------------------------------------------#"


def open_run_log(out_dir, name="run.log"):
    """Create `out_dir` if needed and open the run log inside it for writing.

    Returns:
        stdout (file): File object (stream) to pass as `stdout` to the pipelines.
    """
    os.makedirs(out_dir, exist_ok=True)
    return open(os.path.join(out_dir, name), "w")


def log_event(message, stdout=sys.stdout):
    """Write a single line of logging information without breaking progress bars."""
    tqdm.write(message, file=stdout)


def log_banner(stdout=sys.stdout):
    tqdm.write(BANNER, file=stdout)


def log_parameters(params, stdout=sys.stdout):
    """Write every `key=value` pair of `params`, one per line, in sorted key order.
    The lines can be fed back as a config file to reproduce the run.

    Args:
        params (dict): The effective parameters.
        stdout (file, optional): File object (stream) used for logging information.
            Default value is `sys.stdout`.
    """
    width = max((len(k) for k in params), default=0)
    for key in sorted(params):
        tqdm.write(f"{key:<{width}}={params[key]}", file=stdout)
