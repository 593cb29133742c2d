"""Four-quadrant attacker profiles over (H, S)."""
from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass

from .flowcore import AttackerSummary


class Profile(str, enum.Enum):
    CASUAL_FOCUSED = "CasualFocused"
    CASUAL_EXPLORER = "CasualExplorer"
    DRIVEN_FOCUSED = "DrivenFocused"
    DRIVEN_EXPLORER = "DrivenExplorer"
    UNCLASSIFIED = "Unclassified"

    @property
    def driven(self) -> bool:
        return self in (Profile.DRIVEN_FOCUSED, Profile.DRIVEN_EXPLORER)

    def __str__(self) -> str:
        return self.value


PROFILES = (
    Profile.CASUAL_FOCUSED,
    Profile.CASUAL_EXPLORER,
    Profile.DRIVEN_FOCUSED,
    Profile.DRIVEN_EXPLORER,
)


def classify_hs(h: int, s: int) -> Profile:
    if s <= 0:
        return Profile.UNCLASSIFIED
    if h == 1:
        return Profile.CASUAL_FOCUSED if s == 1 else Profile.CASUAL_EXPLORER
    return Profile.DRIVEN_FOCUSED if s == 1 else Profile.DRIVEN_EXPLORER


def classify(summary: AttackerSummary) -> Profile:
    """Profile from H and S only; attackers without a TCP/UDP service are unclassified."""
    return classify_hs(summary.H, summary.S)


@dataclass(frozen=True)
class ProfileCell:
    profile: Profile
    attacker_count: int
    attack_count: int
    attacker_pct: float
    attack_pct: float
    benign_scanner_pct: float
    tor_pct: float


@dataclass(frozen=True)
class ProfileMatrix:
    """Four profile cells plus the unclassified remainder, all over global totals."""

    cells: dict[Profile, ProfileCell]
    total_attackers: int
    total_attacks: int

    def __getitem__(self, p: Profile) -> ProfileCell:
        return self.cells[p]

    def grid(self, field: str = "attacker_pct") -> list[list[float]]:
        """2x2 layout: rows Focused/Explorer, columns Casual/Driven."""
        g = lambda p: getattr(self.cells[p], field)
        return [
            [g(Profile.CASUAL_FOCUSED), g(Profile.DRIVEN_FOCUSED)],
            [g(Profile.CASUAL_EXPLORER), g(Profile.DRIVEN_EXPLORER)],
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["profile", "attacker_count", "attack_count", "attacker_pct",
             "attack_pct", "benign_scanner_pct", "tor_pct"]
        )
        for p in (*PROFILES, Profile.UNCLASSIFIED):
            c = self.cells[p]
            w.writerow([
                p.value, c.attacker_count, c.attack_count, f"{c.attacker_pct:.2f}",
                f"{c.attack_pct:.2f}", f"{c.benign_scanner_pct:.2f}", f"{c.tor_pct:.2f}",
            ])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "layout": {"rows": ["Focused", "Explorer"], "cols": ["Casual", "Driven"]},
                "attackers_pct": [[round(v, 2) for v in r] for r in self.grid("attacker_pct")],
                "attacks_pct": [[round(v, 2) for v in r] for r in self.grid("attack_pct")],
                "profiles": {
                    p.value: {
                        "attacker_count": c.attacker_count,
                        "attack_count": c.attack_count,
                        "attacker_pct": round(c.attacker_pct, 2),
                        "attack_pct": round(c.attack_pct, 2),
                        "benign_scanner_pct": round(c.benign_scanner_pct, 2),
                        "tor_pct": round(c.tor_pct, 2),
                    }
                    for p, c in self.cells.items()
                },
            },
            indent=2,
        ) + "\n"


def profile_matrix(summaries) -> ProfileMatrix:
    if hasattr(summaries, "values"):
        summaries = summaries.values()
    tallies = {p: [0, 0, 0, 0] for p in (*PROFILES, Profile.UNCLASSIFIED)}
    n_attackers = n_attacks = 0
    for s in summaries:
        t = tallies[classify(s)]
        t[0] += 1
        t[1] += s.attack_count
        t[2] += s.is_benign_scanner
        t[3] += s.is_tor
        n_attackers += 1
        n_attacks += s.attack_count

    def pct(x, total):
        return 100.0 * x / total if total else 0.0

    cells = {
        p: ProfileCell(
            p, a, n, pct(a, n_attackers), pct(n, n_attacks),
            pct(b, n_attackers), pct(tor, n_attackers),
        )
        for p, (a, n, b, tor) in tallies.items()
    }
    return ProfileMatrix(cells, n_attackers, n_attacks)
