import json

import numpy as np

from vegcast.core import ParseError
from vegcast.utils import load_text, save_text

from .kernels import build_kernel, free_hyperparameters
from .model import GPModel

FORMAT_VERSION = 1


def kernel_parameters(model: GPModel) -> dict[str, float]:
    """The fitted kernel parameters as stored on the kernel, keyed by scikit-learn name."""
    params = model.kernel.get_params()
    return {h.name: float(np.asarray(params[h.name]).item()) for h in free_hyperparameters(model.kernel)}


def model_to_text(model: GPModel) -> str:
    """
    Serialise a fitted model.

    The text is a JSON object with the keys ``format``, ``structure``,
    ``hyperparameters`` (natural units, keyed by scikit-learn name),
    ``noise_std``, ``mean``, ``time_offset``, ``log_marginal_likelihood``,
    ``times`` and ``values``. Floats are written at full precision, so a model
    read back predicts bit-identically.
    """
    data = {
        "format": FORMAT_VERSION,
        "structure": model.structure,
        "hyperparameters": kernel_parameters(model),
        "noise_std": float(model.noise_std),
        "mean": float(model.mean),
        "time_offset": float(model.time_offset),
        "log_marginal_likelihood": float(model.log_marginal_likelihood),
        "times": [float(t) for t in model.times],
        "values": [float(v) for v in model.values],
    }
    return json.dumps(data, indent=4, sort_keys=True) + "\n"


def model_from_text(text: str) -> GPModel:
    """
    Rebuild a model written by :func:`model_to_text`.

    Raises
    ------
    ParseError
        If a key is missing or a hyperparameter does not belong to the structure.
    """
    try:
        data = json.loads(text)
        kernel = build_kernel(data["structure"])
        names = [h.name for h in free_hyperparameters(kernel)]
        parameters = data["hyperparameters"]
        if sorted(names) != sorted(parameters):
            raise ParseError(f"hyperparameters {sorted(parameters)} do not match structure "
                             f"{data['structure']} ({sorted(names)})", 1)
        kernel.set_params(**{name: float(parameters[name]) for name in names})
        return GPModel(data["structure"], kernel, data["mean"], data["noise_std"], data["times"], data["values"],
                       time_offset=data["time_offset"], log_marginal_likelihood=data["log_marginal_likelihood"])
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise ParseError(f"malformed GP model: {e}", 1) from None


def save_model(model: GPModel, filename: str):
    save_text(model_to_text(model), filename)


def load_model(filename: str) -> GPModel:
    return model_from_text(load_text(filename))
