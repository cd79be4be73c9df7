"""Run-configuration parsing: one JSON document drives one CLI run.

Each document carries a "command" discriminator plus parameter trees
mirroring the domain types (waveform spec, region, optimization
problem, echo scene).  Parsing is strict — unknown keys are rejected —
and every tree is validated against the same invariants as the
underlying types before any computation starts, so a bad config always
fails fast with a ConfigError.
"""

from __future__ import annotations

import numpy as np

from .costas import CostasCode, generate_welch_costas
from .errors import ConfigError, InvalidInputError
from .fileio import read_json
from .metrics import RegionSpec, default_region
from .scene import Echo, EchoScene, benchmark_scene
from .waveforms import MtsfmParameters, WaveformSpec, swept_bandwidth

_MISSING = object()


class _Tree:
    """Strict view over one config subtree: every key must be consumed."""

    def __init__(self, data, context: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{context} must be a JSON object")
        self._data = dict(data)
        self.context = context

    def take(self, key: str, default=_MISSING):
        if key in self._data:
            return self._data.pop(key)
        if default is _MISSING:
            raise ConfigError(f"{self.context}: missing required key '{key}'")
        return default

    def take_number(self, key: str, default=_MISSING, minimum=None, positive=False):
        value = self.take(key, default)
        if value is default and default is not _MISSING:
            return value
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{self.context}: '{key}' must be a number")
        value = float(value)
        if positive and value <= 0:
            raise ConfigError(f"{self.context}: '{key}' must be positive")
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self.context}: '{key}' must be >= {minimum}")
        return value

    def take_int(self, key: str, default=_MISSING, minimum=None):
        value = self.take(key, default)
        if value is default and default is not _MISSING:
            return value
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{self.context}: '{key}' must be an integer")
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self.context}: '{key}' must be >= {minimum}")
        return value

    def take_subtree(self, key: str, default=_MISSING):
        value = self.take(key, default)
        if value is default and default is not _MISSING:
            return value
        return _Tree(value, f"{self.context}.{key}")

    def finish(self):
        if self._data:
            unknown = ", ".join(sorted(self._data))
            raise ConfigError(f"{self.context}: unknown keys: {unknown}")


def _float_list(tree: _Tree, key: str, default=_MISSING):
    value = tree.take(key, default)
    if value is default and default is not _MISSING:
        return value
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{tree.context}: '{key}' must be a nonempty list")
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{tree.context}: '{key}' must contain numbers") from exc


def load_mtsfm_coefficients(path: str) -> MtsfmParameters:
    """Read an MTSFM coefficients JSON (as written by the optimize command)."""
    doc = _Tree(read_json(path), f"coefficients file {path}")
    alpha = _float_list(doc, "alpha")
    beta = _float_list(doc, "beta")
    duration = doc.take_number("duration_s", positive=True)
    k = doc.take_int("num_harmonics", default=len(alpha), minimum=1)
    doc.finish()
    if k != len(alpha) or len(alpha) != len(beta):
        raise ConfigError(f"coefficients file {path}: alpha/beta/num_harmonics disagree")
    return MtsfmParameters(num_harmonics=k, alpha=np.array(alpha),
                           beta=np.array(beta), duration_s=duration)


def _parse_mtsfm(tree: _Tree, duration_s) -> MtsfmParameters:
    coeff_file = tree.take("coefficients_file", default=None)
    if coeff_file is not None:
        params = load_mtsfm_coefficients(coeff_file)
        if duration_s is not None and abs(params.duration_s - duration_s) > 1e-9:
            raise ConfigError(f"{tree.context}: duration_s disagrees with coefficients file")
        return params
    if duration_s is None:
        raise ConfigError(f"{tree.context}: duration_s required without coefficients_file")
    alpha = _float_list(tree, "alpha")
    beta = _float_list(tree, "beta")
    if len(alpha) != len(beta):
        raise ConfigError(f"{tree.context}: alpha and beta lengths differ")
    return MtsfmParameters(num_harmonics=len(alpha), alpha=np.array(alpha),
                           beta=np.array(beta), duration_s=duration_s)


def _parse_costas_code(tree: _Tree) -> CostasCode:
    explicit = tree.take("code", default=None)
    if explicit is not None:
        if not isinstance(explicit, list):
            raise ConfigError(f"{tree.context}: 'code' must be a list")
        return CostasCode(sequence=tuple(int(v) for v in explicit))
    prime = tree.take_int("prime", minimum=2)
    generator = tree.take_int("generator", minimum=1)
    return generate_welch_costas(prime, generator)


def parse_waveform(data, context: str = "waveform") -> WaveformSpec:
    """Build a validated WaveformSpec from a config subtree.

    Design bandwidth is explicit for LFM/HFM/comb and derived for the
    rest: 2/T for CW (Rayleigh width), N^2/T for Costas FSK, N/T for
    P4, and the swept bandwidth 2*max|f(t)| for MTSFM.
    """
    tree = data if isinstance(data, _Tree) else _Tree(data, context)
    kind = tree.take("kind")
    if not isinstance(kind, str):
        raise ConfigError(f"{tree.context}: 'kind' must be a string")
    kind = kind.lower()
    center = tree.take_number("center_freq_hz", default=0.0)
    try:
        if kind == "cw":
            duration = tree.take_number("duration_s", positive=True)
            spec = WaveformSpec(kind=kind, bandwidth_hz=2.0 / duration,
                                duration_s=duration, center_freq_hz=center)
        elif kind == "lfm":
            duration = tree.take_number("duration_s", positive=True)
            spec = WaveformSpec(kind=kind,
                                bandwidth_hz=tree.take_number("bandwidth_hz", positive=True),
                                duration_s=duration, center_freq_hz=center)
        elif kind == "hfm":
            duration = tree.take_number("duration_s", positive=True)
            spec = WaveformSpec(kind=kind,
                                bandwidth_hz=tree.take_number("bandwidth_hz", positive=True),
                                duration_s=duration, center_freq_hz=center)
        elif kind == "costas_fsk":
            duration = tree.take_number("duration_s", positive=True)
            code = _parse_costas_code(tree)
            spec = WaveformSpec(kind=kind, bandwidth_hz=len(code) ** 2 / duration,
                                duration_s=duration, costas=code, center_freq_hz=center)
        elif kind == "p4":
            duration = tree.take_number("duration_s", positive=True)
            chips = tree.take_int("num_chips", minimum=2)
            spec = WaveformSpec(kind=kind, bandwidth_hz=chips / duration,
                                duration_s=duration, num_chips=chips,
                                center_freq_hz=center)
        elif kind == "geometric_comb":
            duration = tree.take_number("duration_s", positive=True)
            spec = WaveformSpec(kind=kind,
                                bandwidth_hz=tree.take_number("bandwidth_hz", positive=True),
                                duration_s=duration,
                                num_tones=tree.take_int("num_tones", minimum=2),
                                tone_ratio=tree.take_number("tone_ratio"),
                                center_freq_hz=center)
        elif kind == "mtsfm":
            duration = tree.take_number("duration_s", default=None)
            params = _parse_mtsfm(tree, duration)
            spec = WaveformSpec(kind=kind, bandwidth_hz=swept_bandwidth(params),
                                duration_s=params.duration_s, mtsfm=params,
                                center_freq_hz=center)
        else:
            raise ConfigError(f"{tree.context}: unknown waveform kind '{kind}'")
    except InvalidInputError as exc:
        raise ConfigError(f"{tree.context}: {exc}") from exc
    tree.finish()
    return spec


def resolve_sample_rate(spec: WaveformSpec, explicit) -> float:
    """Explicit rate if given, else 8x the design bandwidth (with a floor
    guaranteeing at least 256 samples) — comfortably above the 4x
    synthesis minimum."""
    if explicit is not None:
        return float(explicit)
    return max(8.0 * spec.bandwidth_hz, 256.0 / spec.duration_s)


def parse_region(data, bandwidth_hz: float, duration_s: float,
                 context: str = "region") -> RegionSpec:
    """Region subtree, or the default sidelobe region for (B, T) if None."""
    if data is None:
        return default_region(bandwidth_hz, duration_s)
    tree = data if isinstance(data, _Tree) else _Tree(data, context)
    inner = tree.take_number("inner_delay_s", minimum=0.0)
    outer = tree.take_number("outer_delay_s", positive=True)
    tree.finish()
    try:
        return RegionSpec(inner_delay_s=inner, outer_delay_s=outer)
    except InvalidInputError as exc:
        raise ConfigError(f"{tree.context}: {exc}") from exc


def parse_scene(data, context: str = "scene") -> EchoScene:
    """Echo-scene subtree: explicit echo list or the six-echo benchmark."""
    tree = data if isinstance(data, _Tree) else _Tree(data, context)
    bench_bw = tree.take_number("benchmark_bandwidth_hz", default=None, positive=True)
    if bench_bw is not None:
        first = tree.take_number("first_delay_s", default=None, minimum=0.0)
        tree.finish()
        return benchmark_scene(bench_bw, first_delay_s=first)
    echo_list = tree.take("echoes")
    noise = tree.take_number("noise_level_db", default=None)
    tree.finish()
    if not isinstance(echo_list, list) or not echo_list:
        raise ConfigError(f"{context}: 'echoes' must be a nonempty list")
    echoes = []
    for i, entry in enumerate(echo_list):
        etree = _Tree(entry, f"{context}.echoes[{i}]")
        try:
            echoes.append(Echo(
                delay_s=etree.take_number("delay_s", minimum=0.0),
                doppler_hz=etree.take_number("doppler_hz", default=0.0),
                level_db=etree.take_number("level_db"),
                time_scale=etree.take_number("time_scale", default=1.0, positive=True),
            ))
        except InvalidInputError as exc:
            raise ConfigError(f"{etree.context}: {exc}") from exc
        etree.finish()
    try:
        return EchoScene(echoes=tuple(echoes), noise_level_db=noise)
    except InvalidInputError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def parse_dopplers(tree: _Tree) -> np.ndarray:
    """Doppler grid: explicit list, or a symmetric span with a count."""
    explicit = tree.take("dopplers_hz", default=None)
    if explicit is not None:
        if not isinstance(explicit, list) or not explicit:
            raise ConfigError(f"{tree.context}: 'dopplers_hz' must be a nonempty list")
        return np.array([float(v) for v in explicit])
    span = tree.take_number("doppler_span_hz", positive=True)
    count = tree.take_int("num_dopplers", minimum=1)
    return np.linspace(-span / 2.0, span / 2.0, count)


def load_config(path: str, command: str) -> _Tree:
    """Load a run config and check its command discriminator."""
    doc = read_json(path)
    tree = _Tree(doc, "config")
    declared = tree.take("command", default=command)
    if declared != command:
        raise ConfigError(
            f"config: document says command '{declared}' but '{command}' was invoked")
    return tree
