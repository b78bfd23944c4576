import csv
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from bubblelab.core.errors import CODE_INVALID_INPUT, error_from_code

logger = logging.getLogger(__name__)

ANCHORS_PATH = Path(__file__).parent.parent / "anchors.toml"


@lru_cache(maxsize=1)
def anchor_table() -> Dict[str, str]:
    """Claim topic -> literature reference key."""
    with open(ANCHORS_PATH, "rb") as f:
        return dict(tomllib.load(f)["anchors"])


def resolve_anchor(anchor: str) -> str:
    table = anchor_table()
    if anchor not in table:
        raise error_from_code(CODE_INVALID_INPUT, f"claim anchor {anchor!r} is not in {ANCHORS_PATH.name}")
    return table[anchor]


class Provenance(str, Enum):
    LITERATURE = "LITERATURE"
    DERIVED = "DERIVED"
    TRIVIAL = "TRIVIAL"


class Convention(str, Enum):
    RDR = "r dr (no 2pi)"
    ENERGY = "2pi r dr"
    NONE = "dimensionless"


class Claim(BaseModel):
    """One checked statement: measured against reference within tolerance."""

    name: str
    measured: float
    reference: Optional[float] = None
    tolerance: Optional[float] = None
    passed: bool
    provenance: Provenance = Provenance.DERIVED
    anchor: str = ""
    ref: str = ""
    convention: Convention = Convention.NONE
    gated: bool = True
    details: Dict[str, Any] = Field(default_factory=dict)


class Report(BaseModel):
    experiment_id: str
    claims: List[Claim] = Field(default_factory=list)
    runtime: float = 0.0
    config_hash: str = ""
    seed: Optional[int] = None
    notes: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims if c.gated)

    def failed_claims(self) -> List[Claim]:
        return [c for c in self.claims if c.gated and not c.passed]

    def add(self, claim: Claim) -> Claim:
        claim.ref = resolve_anchor(claim.anchor)
        self.claims.append(claim)
        level = logging.INFO if claim.passed or not claim.gated else logging.WARNING
        logger.log(
            level,
            f"{self.experiment_id}: {claim.name} measured={claim.measured:.6g} "
            f"reference={claim.reference} tol={claim.tolerance} passed={claim.passed}",
        )
        return claim

    def check_close(
        self,
        name: str,
        measured: float,
        reference: float,
        rel_tol: float,
        provenance: Provenance = Provenance.DERIVED,
        anchor: str = "",
        convention: Convention = Convention.NONE,
        **details: Any,
    ) -> Claim:
        err = abs(measured - reference) / max(abs(reference), 1e-300)
        return self.add(Claim(
            name=name, measured=float(measured), reference=float(reference), tolerance=rel_tol,
            passed=bool(err <= rel_tol), provenance=provenance, anchor=anchor,
            convention=convention, details={"rel_error": float(err), **details},
        ))

    def check_below(
        self,
        name: str,
        measured: float,
        bound: float,
        provenance: Provenance = Provenance.DERIVED,
        anchor: str = "",
        gated: bool = True,
        convention: Convention = Convention.NONE,
        **details: Any,
    ) -> Claim:
        return self.add(Claim(
            name=name, measured=float(measured), reference=float(bound), tolerance=None,
            passed=bool(measured <= bound), provenance=provenance, anchor=anchor,
            gated=gated, convention=convention, details=dict(details),
        ))

    def check_above(
        self,
        name: str,
        measured: float,
        bound: float,
        provenance: Provenance = Provenance.DERIVED,
        anchor: str = "",
        gated: bool = True,
        **details: Any,
    ) -> Claim:
        return self.add(Claim(
            name=name, measured=float(measured), reference=float(bound), tolerance=None,
            passed=bool(measured >= bound), provenance=provenance, anchor=anchor,
            gated=gated, details=dict(details),
        ))

    def check_envelope(
        self,
        name: str,
        ratios: List[float],
        slope: float,
        c_bound: float,
        slope_tol: float,
        provenance: Provenance = Provenance.LITERATURE,
        anchor: str = "",
        convention: Convention = Convention.NONE,
        **details: Any,
    ) -> Claim:
        """Ratio to a claimed envelope: bounded by c_bound and not growing (log slope >= -slope_tol)."""
        max_ratio = float(max(ratios))
        return self.add(Claim(
            name=name, measured=max_ratio, reference=float(c_bound), tolerance=slope_tol,
            passed=bool(max_ratio <= c_bound and slope >= -slope_tol), provenance=provenance,
            anchor=anchor, convention=convention,
            details={"slope": float(slope), "ratios": [float(v) for v in ratios], **details},
        ))

    def save(self, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "report.json"
        path.write_text(self.model_dump_json(indent=2))
        with open(out_dir / "claims.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["name", "measured", "reference", "tolerance", "passed",
                             "gated", "provenance", "anchor", "ref", "convention"])
            for c in self.claims:
                writer.writerow([c.name, c.measured, c.reference, c.tolerance, c.passed,
                                 c.gated, c.provenance.value, c.anchor, c.ref, c.convention.value])
        logger.info(f"Report for {self.experiment_id} written to {path}")
        return path


def write_columns(path: Path, columns: Dict[str, Any]) -> Path:
    """Write equal-length columns to CSV."""
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    rows = zip(*(list(columns[n]) for n in names))
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(names)
        for row in rows:
            writer.writerow([f"{float(v):.17g}" for v in row])
    return path
