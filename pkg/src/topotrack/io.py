"""File formats: XYZ frames, sequence manifests and the states document.

Frame files hold one point per line, three floats separated by whitespace or
commas; blank lines and ``#`` comments are skipped.  A manifest is a JSON
object listing frame files (relative to the manifest) and optionally the
parameters the sequence was generated with.  The states document is JSON
whose floats are written with ``repr``, the shortest text that parses back
to the same double, so a write/read cycle is lossless.
"""

import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .errors import InputError
from .mixture import LoopMixture
from .persistence import EdgeRef, LoopDescriptor, TriangleRef
from .tracker import TopologicalState
from .vr_complex import PointCloud

STATES_VERSION = "topotrack-states/1"
MANIFEST_NAME = "manifest.json"
FRAME_SUFFIXES = (".xyz", ".txt", ".csv")
_SPLIT = re.compile(r"[,\s]+")


@dataclass
class SequenceManifest:
    frames: List[Path]
    alpha: Optional[float] = None
    beta: Optional[float] = None
    epsilon: Optional[float] = None
    units: Optional[str] = None


@dataclass
class StatesDocument:
    """Everything ``run`` writes: parameters, states and one mixture per loop."""

    parameters: Dict[str, object]
    states: List[TopologicalState]
    mixtures: List[Dict[int, LoopMixture]] = field(default_factory=list)
    version: str = STATES_VERSION


def parse_frame(path, frame_index: int = 0) -> PointCloud:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read frame file ({exc.strerror})") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = [p for p in _SPLIT.split(body) if p]
        if len(parts) != 3:
            raise InputError(f"{path}:{lineno}: expected 3 coordinates, got {len(parts)}")
        try:
            xyz = [float(p) for p in parts]
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
        if not all(math.isfinite(v) for v in xyz):
            raise InputError(f"{path}:{lineno}: coordinates must be finite")
        rows.append(xyz)
    if not rows:
        raise InputError(f"{path}: frame file holds no points")
    return PointCloud(np.array(rows, dtype=float), frame_index)


def write_frame(points, path):
    pts = points.points if isinstance(points, PointCloud) else np.asarray(points, dtype=float)
    with open(path, "w") as fh:
        for x, y, z in pts.tolist():
            fh.write(f"{x!r} {y!r} {z!r}\n")


def _optional_float(data, key, where):
    value = data.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{where}: {key} must be a number")
    return float(value)


def read_manifest(path) -> SequenceManifest:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"{path}: cannot read manifest ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict) or not isinstance(data.get("frames"), list):
        raise InputError(f"{path}: manifest needs a 'frames' list")
    frames = []
    for entry in data["frames"]:
        if not isinstance(entry, str):
            raise InputError(f"{path}: frame entries must be file names")
        frames.append(path.parent / entry)
    units = data.get("units")
    return SequenceManifest(frames, _optional_float(data, "alpha", path),
                            _optional_float(data, "beta", path),
                            _optional_float(data, "epsilon", path),
                            None if units is None else str(units))


def write_manifest(manifest: SequenceManifest, path):
    path = Path(path)
    data = {"frames": [os.path.relpath(f, path.parent) for f in manifest.frames]}
    for key in ("alpha", "beta", "epsilon", "units"):
        value = getattr(manifest, key)
        if value is not None:
            data[key] = value
    path.write_text(json.dumps(data, indent=2) + "\n")


def sequence_manifest(path) -> SequenceManifest:
    """Manifest for a manifest file, or for a directory of frame files.

    A directory containing ``manifest.json`` uses it; otherwise its frame
    files are taken in lexicographic order of their names.
    """
    path = Path(path)
    if path.is_dir():
        if (path / MANIFEST_NAME).is_file():
            return read_manifest(path / MANIFEST_NAME)
        files = sorted(p for p in path.iterdir()
                       if p.is_file() and p.suffix.lower() in FRAME_SUFFIXES)
        return SequenceManifest(files)
    if path.is_file():
        return read_manifest(path)
    raise InputError(f"{path}: no such file or directory")


def load_sequence(path) -> List[PointCloud]:
    manifest = sequence_manifest(path)
    if not manifest.frames:
        raise InputError(f"{path}: sequence has no frames")
    return [parse_frame(f, t) for t, f in enumerate(manifest.frames)]


# states document ---------------------------------------------------------

def _coords(coords):
    return [list(p) for p in coords]


def _edge_json(e: EdgeRef):
    return {"vertices": list(e.vertices), "coords": _coords(e.coords), "value": e.value}


def _triangle_json(t: TriangleRef):
    return {"vertices": list(t.vertices), "coords": _coords(t.coords), "value": t.value,
            "paired": t.paired}


def _mixture_json(m: LoopMixture):
    return {
        "eps_reg": m.eps_reg,
        "component_source": list(m.component_source),
        "weight_seeds": m.weight_seeds.tolist(),
        "weights": m.weights.tolist(),
        "means": m.means.tolist(),
        "covariances": m.covariances.tolist(),
    }


def _loop_json(d: LoopDescriptor, mixture: Optional[LoopMixture]):
    out = {
        "id": d.id,
        "birth": d.birth,
        "death": d.death,
        "lifetime": d.lifetime,
        "hausdorff_prev": d.hausdorff_prev,
        "killer_edge": _edge_json(d.killer_edge),
        "killer_triangles": [_triangle_json(t) for t in d.killer_triangles],
        "neighbor_triangles": [_triangle_json(t) for t in d.neighbor_triangles],
    }
    if mixture is not None:
        out["mixture"] = _mixture_json(mixture)
    return out


def states_to_json(doc: StatesDocument) -> str:
    frames = []
    for t, state in enumerate(doc.states):
        mixtures = doc.mixtures[t] if t < len(doc.mixtures) else {}
        frames.append({
            "frame_index": state.frame_index,
            "loops": [_loop_json(d, mixtures.get(d.id)) for d in state.loops],
        })
    data = {"version": doc.version, "parameters": doc.parameters, "frames": frames}
    # the json module writes floats with repr; NaN and infinity are refused
    try:
        return json.dumps(data, indent=1, allow_nan=False) + "\n"
    except ValueError as exc:
        raise InputError(f"states are not serialisable: {exc}") from exc


def write_states(doc: StatesDocument, path):
    text = states_to_json(doc)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"{path}: cannot write states ({exc.strerror})") from exc


def _tuple_coords(rows):
    return tuple(tuple(float(v) for v in p) for p in rows)


def _edge_from(obj):
    return EdgeRef(tuple(int(v) for v in obj["vertices"]), _tuple_coords(obj["coords"]),
                   float(obj["value"]))


def _triangle_from(obj):
    return TriangleRef(tuple(int(v) for v in obj["vertices"]), _tuple_coords(obj["coords"]),
                       float(obj["value"]), bool(obj["paired"]))


def _mixture_from(obj, loop_id):
    return LoopMixture(
        loop_id=loop_id,
        weights=np.array(obj["weights"], dtype=float),
        means=np.array(obj["means"], dtype=float).reshape(-1, 3),
        covariances=np.array(obj["covariances"], dtype=float).reshape(-1, 3, 3),
        component_source=tuple(obj["component_source"]),
        weight_seeds=np.array(obj["weight_seeds"], dtype=float),
        eps_reg=float(obj["eps_reg"]),
    )


def states_from_json(text, where="<states>") -> StatesDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict) or data.get("version") != STATES_VERSION:
        raise InputError(f"{where}: not a {STATES_VERSION} document")
    states, mixtures = [], []
    try:
        for frame in data["frames"]:
            t = int(frame["frame_index"])
            loops, mix = [], {}
            for obj in frame["loops"]:
                hp = obj["hausdorff_prev"]
                d = LoopDescriptor(
                    birth=float(obj["birth"]),
                    death=float(obj["death"]),
                    killer_edge=_edge_from(obj["killer_edge"]),
                    killer_triangles=tuple(_triangle_from(x) for x in obj["killer_triangles"]),
                    neighbor_triangles=tuple(_triangle_from(x) for x in obj["neighbor_triangles"]),
                    id=None if obj["id"] is None else int(obj["id"]),
                    hausdorff_prev=None if hp is None else float(hp),
                    frame_index=t,
                )
                loops.append(d)
                if "mixture" in obj:
                    mix[d.id] = _mixture_from(obj["mixture"], d.id)
            states.append(TopologicalState(t, tuple(loops)))
            mixtures.append(mix)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: malformed states document ({exc!r})") from exc
    return StatesDocument(dict(data.get("parameters", {})), states, mixtures, data["version"])


def read_states(path) -> StatesDocument:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read states ({exc.strerror})") from exc
    return states_from_json(text, str(path))


# generated scenes ----------------------------------------------------------

def truth_to_json(truth) -> str:
    spec = truth.spec
    data = {
        "spec": None if spec is None else {k: getattr(spec, k) for k in spec.__dataclass_fields__},
        "alpha": truth.alpha,
        "beta": truth.beta,
        "epsilon": truth.epsilon,
        "covering_radius": list(truth.covering_radius),
        "max_step_displacement": list(truth.max_step_displacement),
        "frames": [[{"center": list(lt.center), "normal": list(lt.normal), "radius": lt.radius,
                     "thickness": lt.thickness} for lt in loops] for loops in truth.loops],
    }
    return json.dumps(data, indent=1, allow_nan=False) + "\n"


def write_scene(frames, truth, outdir) -> Path:
    """Frame files, a manifest carrying the scene bounds, and ``truth.json``."""
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        names = []
        for t, cloud in enumerate(frames):
            name = f"frame_{t:05d}.xyz"
            write_frame(cloud, outdir / name)
            names.append(outdir / name)
        manifest = SequenceManifest(names, truth.alpha, truth.beta, truth.epsilon)
        write_manifest(manifest, outdir / MANIFEST_NAME)
        (outdir / "truth.json").write_text(truth_to_json(truth))
    except OSError as exc:
        raise InputError(f"{outdir}: cannot write scene ({exc.strerror})") from exc
    return outdir / MANIFEST_NAME
