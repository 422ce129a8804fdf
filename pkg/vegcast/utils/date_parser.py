from datetime import date, datetime


def parse_date(token: str) -> date:
    """
    Parse an ISO-8601 calendar date.

    Accepts ``YYYY-MM-DD`` and full timestamps (``YYYY-MM-DDTHH:MM:SS``, optionally
    with an offset), in which case the time of day is discarded. The whole token
    must parse; trailing text after a valid date is an error.

    Parameters
    ----------
    token : str
        The text to parse.

    Returns
    -------
    date
        The parsed date.

    Raises
    ------
    ValueError
        If the token is not an ISO-8601 date.
    """
    token = token.strip()
    if len(token) == 10:
        return date.fromisoformat(token)
    if len(token) > 10 and token[10] in "T ":
        return datetime.fromisoformat(token).date()
    raise ValueError(f"not an ISO-8601 date: {token!r}")
