import hashlib
import json
import os
from abc import ABC, abstractmethod


class StageStore(ABC):
    """
    A keyed store of stage outputs.
    """

    def __init__(self, path: str):
        self.path = path
        if path and not os.path.exists(path):
            os.makedirs(path)

    @abstractmethod
    def save(self):
        """
        Save the store index to disk.
        """
        pass

    @abstractmethod
    def load(self):
        """
        Load the store index from disk.
        """
        pass

    @abstractmethod
    def set(self, key: str, value):
        """
        Store a stage output.

        Parameters
        ----------
        key : str
            Content hash identifying the output.
        value
            The output.
        """
        pass

    @abstractmethod
    def get(self, key: str):
        """
        Get a stage output.

        Parameters
        ----------
        key : str
            The key to get.

        Returns
        -------
        The output, or None if the key is not stored.
        """
        pass

    @abstractmethod
    def __contains__(self, key: str) -> bool:
        pass


def content_key(stage: str, *parts) -> str:
    """
    Hash a stage name and everything its output depends on.

    Parts are serialised as sorted-key JSON, so dicts with the same content give
    the same key regardless of insertion order.
    """
    payload = json.dumps([stage, *parts], sort_keys=True, default=str)
    return f"{stage}-{hashlib.sha256(payload.encode('utf-8')).hexdigest()[:32]}"


def fingerprint_files(file_names: list[str]) -> str:
    """SHA-256 over the names and bytes of ``file_names`` in sorted order."""
    digest = hashlib.sha256()
    for file_name in sorted(file_names):
        digest.update(os.path.basename(file_name).encode("utf-8"))
        with open(file_name, "rb") as f:
            for block in iter(lambda: f.read(1 << 20), b""):
                digest.update(block)
    return digest.hexdigest()
