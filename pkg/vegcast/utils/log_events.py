import logging

from vegcast.core.reasons import ReasonCode


def format_event(stage: str, region: str | None = None, reason: ReasonCode | str | None = None,
                 **fields) -> str:
    """
    Render one structured event line: ``stage=<stage> region=<id> reason=<CODE> key=value ...``.

    Fields are written in the order given; values containing spaces are quoted.
    """
    parts = [f"stage={stage}"]
    if region is not None:
        parts.append(f"region={region}")
    if reason is not None:
        parts.append(f"reason={reason}")
    for key, value in fields.items():
        text = f"{value:.6g}" if isinstance(value, float) else str(value)
        if " " in text or not text:
            text = '"' + text.replace('"', "'") + '"'
        parts.append(f"{key}={text}")
    return " ".join(parts)


def log_event(logger: logging.Logger, stage: str, region: str | None = None,
              reason: ReasonCode | str | None = None, level: int = logging.INFO, **fields):
    """
    Log a structured pipeline event.

    Events carrying a reason code are logged at WARNING unless a level is given
    explicitly.
    """
    if reason is not None and level == logging.INFO:
        level = logging.WARNING
    logger.log(level, format_event(stage, region, reason, **fields))
