import logging

import colorlog

LOG_FORMAT = "%(log_color)s%(asctime)s %(levelname)-8s%(reset)s %(name)s: %(message)s"


def setup_logging(level: str = "INFO") -> None:
    """Install a single colored console handler on the root logger."""
    root = logging.getLogger()
    if any(getattr(h, "_hotplug", False) for h in root.handlers):
        root.setLevel(level)
        return

    handler = colorlog.StreamHandler()
    handler.setFormatter(
        colorlog.ColoredFormatter(
            LOG_FORMAT,
            datefmt="%H:%M:%S",
            log_colors={
                "DEBUG": "cyan",
                "INFO": "green",
                "WARNING": "yellow",
                "ERROR": "red",
                "CRITICAL": "bold_red",
            },
        )
    )
    handler._hotplug = True
    root.addHandler(handler)
    root.setLevel(level)
