# small helpers to write report artifacts deterministically

import json
import os


def _ensure_parent(filename: str):
    parent = os.path.dirname(filename)
    if parent and not os.path.exists(parent):
        os.makedirs(parent, exist_ok=True)


def save_text(text: str, filename: str):
    """
    Save a text to a file (UTF-8, LF line endings).

    Parameters
    ----------
    text : str
        The text to save.
    filename : str
        The filename to save the text to.
    """
    _ensure_parent(filename)
    with open(filename, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def load_text(filename: str) -> str:
    """
    Load a text from a file.

    Parameters
    ----------
    filename : str
        The filename to load the text from.

    Returns
    -------
    str
        The loaded text.
    """
    if not os.path.exists(filename):
        raise FileNotFoundError(f"File {filename} not found.")

    with open(filename, "r", encoding="utf-8") as f:
        return f.read()


def save_json(data: dict, filename: str):
    """
    Save a JSON object to a file.

    Keys are sorted and NaN is written as ``null`` so two runs with the same
    content produce byte-identical files.

    Parameters
    ----------
    data : dict
        The JSON object to save.
    filename : str
        The filename to save the JSON object to.
    """
    save_text(json.dumps(_nan_to_none(data), indent=4, sort_keys=True) + "\n", filename)


def load_json(filename: str) -> dict:
    """
    Load a JSON object from a file.

    Parameters
    ----------
    filename : str
        The filename to load the JSON object from.

    Returns
    -------
    dict
        The loaded JSON object.
    """
    return json.loads(load_text(filename))


def save_frame(frame, filename: str):
    """
    Save a pandas DataFrame as CSV with full float precision and no index.
    """
    _ensure_parent(filename)
    frame.to_csv(filename, index=False, lineterminator="\n", na_rep="")


def _nan_to_none(value):
    if isinstance(value, float) and value != value:
        return None
    if isinstance(value, dict):
        return {str(k): _nan_to_none(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_nan_to_none(v) for v in value]
    return value
