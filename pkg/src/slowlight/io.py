"""CSV histories and the plain-text metrics report."""

from __future__ import annotations

import contextlib
import io
import os

import numpy as np

from .errors import EmptySignal, SinkError

FIELD_HEADER = ("z", "t", "tau", "psi_re", "psi_im", "abs_psi")
SPIN_HEADER = ("z", "t", "tau", "cm_re", "cm_im", "cbm_re", "cbm_im", "abs_cm", "abs_cbm")
_FMT = "%.9g"


@contextlib.contextmanager
def _open_sink(sink):
    if hasattr(sink, "write"):
        yield sink
        return
    try:
        fh = open(os.fspath(sink), "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise SinkError(f"cannot open {sink}: {exc}") from None
    with fh:
        yield fh


def _grid_columns(z, tau, c, z_stride, tau_stride):
    zz = np.asarray(z)[::z_stride]
    tt = np.asarray(tau)[::tau_stride]
    zg, tg = np.meshgrid(zz, tt, indexing="ij")
    return zg.ravel(), (tg + zg / c).ravel(), tg.ravel()


def _write(sink, header, columns) -> int:
    table = np.column_stack(columns)
    try:
        with _open_sink(sink) as fh:
            fh.write(",".join(header) + "\n")
            np.savetxt(fh, table, fmt=_FMT, delimiter=",", newline="\n")
    except OSError as exc:
        raise SinkError(f"write failed: {exc}") from None
    return table.shape[0]


def write_field_csv(history, sink, z_stride: int = 1, tau_stride: int = 1) -> int:
    """Write ``z,t,tau,psi_re,psi_im,abs_psi`` rows in z-major order; returns the row count."""
    if history.psi.size == 0:
        raise EmptySignal("field history is empty")
    z, t, tau = _grid_columns(history.z, history.tau, history.c, z_stride, tau_stride)
    psi = history.psi[::z_stride, ::tau_stride].ravel()
    return _write(sink, FIELD_HEADER, (z, t, tau, psi.real, psi.imag, np.abs(psi)))


def write_spin_csv(atoms, c: float, sink, z_stride: int = 1, tau_stride: int = 1) -> int:
    """Write the spin waves C_m and C_M in the same layout as the field file."""
    if atoms.x.size == 0:
        raise EmptySignal("atomic history is empty")
    z, t, tau = _grid_columns(atoms.z, atoms.tau, c, z_stride, tau_stride)
    cm = atoms.x[::z_stride, ::tau_stride].ravel()
    cbm = atoms.c_big_m[::z_stride, ::tau_stride].ravel()
    return _write(
        sink, SPIN_HEADER, (z, t, tau, cm.real, cm.imag, cbm.real, cbm.imag, np.abs(cm), np.abs(cbm))
    )


def read_csv(source) -> dict[str, np.ndarray]:
    """Read a file written by this module into named columns."""
    text = source.read() if hasattr(source, "read") else open(os.fspath(source), encoding="utf-8").read()
    header, _, body = text.partition("\n")
    names = header.strip().split(",")
    data = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    return {n: data[:, i] for i, n in enumerate(names)}


def write_metrics(metrics: dict, sink) -> None:
    """Plain ``key = value`` lines in insertion order."""
    lines = []
    for k, v in metrics.items():
        if isinstance(v, float):
            v = format(v, ".9g")
        lines.append(f"{k} = {v}\n")
    try:
        with _open_sink(sink) as fh:
            fh.writelines(lines)
    except OSError as exc:
        raise SinkError(f"write failed: {exc}") from None


def read_metrics(source) -> dict[str, str]:
    text = source.read() if hasattr(source, "read") else open(os.fspath(source), encoding="utf-8").read()
    out = {}
    for line in text.splitlines():
        if "=" in line:
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out
