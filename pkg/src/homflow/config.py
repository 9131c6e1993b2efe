"""Configuration files for the command line tools.

Configs are TOML or JSON (decided by file extension) and describe the
system to act on plus per-command parameters.  The system is either an
explicit polynomial

    [polynomial]            # or a "polynomial" object in JSON
    n_vars = 2
    degree = 4
    terms = [{ exps = [4, 0], coef = 1.0 }, ...]

or an operator family acting on R^dim

    [action]
    dim = 2

    [group]
    generators = [[0.7071, 0.0, 0.0, -0.7071]]   # row-major dim*dim

    [k_group]                                     # optional symmetry
    kind = "torus"                                # or "finite"
    generators = [[0.0, -1.0, 1.0, 0.0]]          # torus: antisymmetric
    # elements = [[...], ...]                     # finite: orthogonal

in which case the energy is the degree-4 moment energy of the
orthonormalized symmetric parts of the generators.

Every output produced from a config embeds the SHA-256 hash of its
canonical JSON form, so results are traceable to the exact inputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python 3.10
    import tomli as _toml

from .groups import CompactGroupSampler, MomentMap, SelfAdjointBasis, \
    orthonormalize_basis
from .poly import HomogeneousPolynomial

__all__ = [
    "ConfigError",
    "load_config",
    "config_hash",
    "SystemBundle",
    "build_system",
    "build_k_sampler",
]


class ConfigError(Exception):
    """A config file is missing, malformed or inconsistent."""


def load_config(path: str) -> dict:
    """Parse a TOML (.toml) or JSON (.json) config file into a dict."""
    p = str(path)
    try:
        if p.endswith(".toml"):
            with open(p, "rb") as fh:
                return _toml.load(fh)
        if p.endswith(".json"):
            with open(p, "r") as fh:
                return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    except (ValueError, _toml.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {p}: {exc}") from exc
    raise ConfigError(f"config {p} must end in .toml or .json")


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical JSON form (sorted keys, tight separators)."""
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _as_matrix(raw, dim: int, what: str) -> np.ndarray:
    """Accept a row-major flat list of dim*dim numbers or a nested list."""
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 1:
        if arr.size != dim * dim:
            raise ConfigError(
                f"{what} has {arr.size} entries, expected {dim * dim} "
                f"(row-major {dim}x{dim})"
            )
        return arr.reshape(dim, dim)
    if arr.shape == (dim, dim):
        return arr
    raise ConfigError(f"{what} has shape {arr.shape}, expected ({dim}, {dim})")


@dataclass
class SystemBundle:
    """A parsed system ready for the flow and scan tools."""

    kind: str  # "polynomial" or "group"
    system: object  # exposes n_vars, eval, grad_eval
    n_vars: int
    basis: Optional[SelfAdjointBasis] = None
    k_sampler: Optional[CompactGroupSampler] = None


def build_k_sampler(cfg: dict, dim: int) -> Optional[CompactGroupSampler]:
    sect = cfg.get("k_group")
    if sect is None:
        return None
    kind = sect.get("kind")
    try:
        if kind == "torus":
            gens = sect.get("generators")
            if not gens:
                raise ConfigError("[k_group] kind=torus needs generators")
            mats = [_as_matrix(g, dim, f"k_group generator {i}")
                    for i, g in enumerate(gens)]
            return CompactGroupSampler("torus", generators=mats)
        if kind == "finite":
            els = sect.get("elements")
            if not els:
                raise ConfigError("[k_group] kind=finite needs elements")
            mats = [_as_matrix(g, dim, f"k_group element {i}")
                    for i, g in enumerate(els)]
            return CompactGroupSampler("finite", elements=mats)
    except ValueError as exc:
        raise ConfigError(f"invalid k_group: {exc}") from exc
    raise ConfigError(f"[k_group] kind must be 'finite' or 'torus', got {kind!r}")


def build_system(cfg: dict) -> SystemBundle:
    """Construct the energy described by a config dict."""
    has_poly = "polynomial" in cfg
    has_group = "group" in cfg
    if has_poly and has_group:
        raise ConfigError("config defines both a polynomial and a group; pick one")
    if has_poly:
        try:
            phi = HomogeneousPolynomial.from_json_dict(cfg["polynomial"])
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"invalid polynomial: {exc}") from exc
        return SystemBundle(kind="polynomial", system=phi, n_vars=phi.n_vars,
                            k_sampler=build_k_sampler(cfg, phi.n_vars))
    if has_group:
        try:
            dim = int(cfg["action"]["dim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("group configs need [action] dim") from exc
        gens = cfg["group"].get("generators")
        if not gens:
            raise ConfigError("[group] needs a nonempty generators list")
        mats = [_as_matrix(g, dim, f"group generator {i}")
                for i, g in enumerate(gens)]
        try:
            basis = orthonormalize_basis(mats)
        except ValueError as exc:
            raise ConfigError(f"invalid group generators: {exc}") from exc
        return SystemBundle(kind="group", system=MomentMap(basis), n_vars=dim,
                            basis=basis, k_sampler=build_k_sampler(cfg, dim))
    raise ConfigError("config must define a [polynomial] or a [group] section")
