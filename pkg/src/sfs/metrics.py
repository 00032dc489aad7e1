"""Error estimators over the Inside node set."""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMask
from .reflectance import quantize_image


@dataclass(frozen=True)
class ErrorReport:
    """Discrete norms of an error vector: mean, RMS and max of |e|.

    ``err1`` is the N-normalised L1 norm, ``err2`` the N-normalised L2
    norm (the printed "standard deviation of the absolute error", i.e. the
    root mean square, not the deviation about the mean), ``l2`` is an
    alias of err2, ``linf`` the max.
    """

    err1: float
    err2: float
    linf: float
    n: int

    @property
    def l2(self):
        return self.err2

    def as_dict(self):
        return {"err1": self.err1, "err2": self.err2, "l2": self.l2,
                "linf": self.linf, "n": self.n}


def _norms(errors):
    n = errors.size
    if n == 0:
        raise EmptyMask("no Inside nodes to measure over")
    abs_e = np.abs(errors)
    return ErrorReport(
        err1=float(abs_e.mean()),
        err2=float(np.sqrt((abs_e * abs_e).mean())),
        linf=float(abs_e.max()),
        n=int(n),
    )


def surface_errors(u_ref, u_est, mask):
    """Height-field error norms over Inside nodes."""
    u_ref = np.asarray(u_ref, dtype=np.float64)
    u_est = np.asarray(u_est, dtype=np.float64)
    return _norms((u_ref - u_est)[mask.inside])


def image_errors(i_ref, i_est, mask, quantized=True):
    """Brightness error norms over Inside nodes.

    With ``quantized`` both images are first collapsed to 256 gray levels,
    matching comparisons between 8-bit files.
    """
    i_ref = np.asarray(i_ref, dtype=np.float64)
    i_est = np.asarray(i_est, dtype=np.float64)
    if quantized:
        i_ref = quantize_image(i_ref)
        i_est = quantize_image(i_est)
    return _norms((i_ref - i_est)[mask.inside])
