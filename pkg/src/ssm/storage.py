"""
DelaySSM — SsmExpansion persistence.
Self-describing numpy .npz archives, loaded with allow_pickle disabled.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from src.core.errors import ExpansionFileError
from src.model.delay_system import ForcingTag
from src.spectral.eigen import MasterMode
from src.ssm.expansion import SsmExpansion

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def save_expansion(ssm: SsmExpansion, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    m = ssm.master
    with open(path, "wb") as fh:
        np.savez(
            fh,
            format_version=np.array(FORMAT_VERSION),
            order=np.array(ssm.order),
            master_lambda=np.array(m.lam, dtype=complex),
            master_v=m.v,
            master_u=m.u,
            master_index=np.array(m.index),
            spectrum=m.spectrum_values,
            W=ssm.W,
            gamma=ssm.gamma,
            x0_nonauto=ssm.x0_nonauto if ssm.x0_nonauto is not None else np.zeros(0, dtype=complex),
            modal_force=np.array([] if ssm.modal_force is None else [ssm.modal_force], dtype=complex),
            Omega=np.array([] if ssm.Omega is None else [ssm.Omega], dtype=float),
            epsilon=np.array(ssm.epsilon),
            forcing_tag=np.array(ssm.forcing_tag.value),
            conv_radius=np.array([] if ssm.conv_radius is None else [ssm.conv_radius], dtype=float),
        )
    logger.info(f"SSM expansion saved to {path}", extra={"props": {"order": ssm.order}})
    return path


def _optional(arr: np.ndarray):
    return arr[0].item() if arr.size else None


def load_expansion(path: str | Path) -> SsmExpansion:
    path = Path(path)
    if not path.exists():
        raise ExpansionFileError(f"SSM expansion file not found: {path}", path=str(path))
    try:
        with np.load(path, allow_pickle=False) as data:
            version = int(data["format_version"])
            if version != FORMAT_VERSION:
                raise ExpansionFileError(f"unsupported expansion format {version} in {path}")
            master = MasterMode(
                lam=complex(data["master_lambda"]),
                v=data["master_v"],
                u=data["master_u"],
                index=int(data["master_index"]),
                spectrum_values=data["spectrum"],
            )
            x0 = data["x0_nonauto"]
            return SsmExpansion(
                order=int(data["order"]),
                master=master,
                W=data["W"],
                gamma=data["gamma"],
                x0_nonauto=x0 if x0.size else None,
                modal_force=_optional(data["modal_force"]),
                Omega=_optional(data["Omega"]),
                epsilon=float(data["epsilon"]),
                forcing_tag=ForcingTag(str(data["forcing_tag"])),
                conv_radius=_optional(data["conv_radius"]),
            )
    except (KeyError, ValueError, OSError) as e:
        raise ExpansionFileError(f"unreadable SSM expansion {path}: {e}", path=str(path)) from e
