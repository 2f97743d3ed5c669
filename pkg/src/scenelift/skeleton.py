"""Skeleton definition: joint names plus the root/head/feet designations.

The default skeleton is a 16-joint body (pelvis, spine, neck, head, arms,
legs) extended with the two hand endpoints, for 18 joints total.  The root
joint is the pelvis, defined as the midpoint of the left and right hips.
Foot joints mark the ground contacts used by ground-plane scaling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IoFailure, SchemaViolation

SKELETON_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Skeleton:
    """Ordered joint names with the structural designations.

    Immutable after construction; per-joint arrays elsewhere in the package
    follow the order of ``joints``.
    """

    joints: tuple[str, ...]
    root: str
    head: str
    feet: tuple[str, ...]
    left_hip: str
    right_hip: str
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.joints)) != len(self.joints):
            raise SchemaViolation("skeleton joint names must be unique")
        for name in (self.root, self.head, self.left_hip, self.right_hip, *self.feet):
            if name not in self.joints:
                raise SchemaViolation(f"designated joint {name!r} not in joint list")
        if self.head == self.root:
            raise SchemaViolation("head and root must be distinct joints")
        if not self.feet:
            raise SchemaViolation("skeleton must declare at least one foot joint")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.joints)})

    def __len__(self) -> int:
        return len(self.joints)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        return self._index[name]

    @property
    def root_index(self) -> int:
        return self._index[self.root]

    @property
    def head_index(self) -> int:
        return self._index[self.head]

    @property
    def foot_indices(self) -> tuple[int, ...]:
        return tuple(self._index[f] for f in self.feet)

    def to_dict(self) -> dict:
        return {
            "schema_version": SKELETON_SCHEMA_VERSION,
            "joints": list(self.joints),
            "root": self.root,
            "head": self.head,
            "feet": list(self.feet),
            "left_hip": self.left_hip,
            "right_hip": self.right_hip,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Skeleton":
        try:
            return cls(
                joints=tuple(data["joints"]),
                root=data["root"],
                head=data["head"],
                feet=tuple(data["feet"]),
                left_hip=data["left_hip"],
                right_hip=data["right_hip"],
            )
        except KeyError as exc:
            raise SchemaViolation(f"skeleton definition missing field {exc.args[0]!r}") from exc


def load_skeleton(path: str | Path) -> Skeleton:
    """Read a skeleton definition JSON file (see docs/formats.md)."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read skeleton file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: invalid JSON: {exc}") from exc
    return Skeleton.from_dict(data)


def save_skeleton(skeleton: Skeleton, path: str | Path) -> None:
    path = Path(path)
    try:
        path.write_text(json.dumps(skeleton.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write skeleton file {path}: {exc}") from exc


#: 16-joint body plus left/right hand endpoints.
DEFAULT_SKELETON = Skeleton(
    joints=(
        "pelvis",
        "left_hip",
        "right_hip",
        "left_knee",
        "right_knee",
        "left_foot",
        "right_foot",
        "spine",
        "neck",
        "head",
        "left_shoulder",
        "right_shoulder",
        "left_elbow",
        "right_elbow",
        "left_wrist",
        "right_wrist",
        "left_hand",
        "right_hand",
    ),
    root="pelvis",
    head="head",
    feet=("left_foot", "right_foot"),
    left_hip="left_hip",
    right_hip="right_hip",
)
