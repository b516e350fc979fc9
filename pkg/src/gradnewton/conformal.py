"""Discrete conformal metrics with prescribed angle sums on a fixed triangulation.

Per-vertex log scale factors ``u`` rescale edge lengths as
``l_ij * exp((u_i + u_j) / 2)``.  The objective is the convex energy whose
gradient is the angle-sum residual ``theta_hat - theta(u)`` and whose Hessian
is the cotan Laplacian of the rescaled metric.  Its value is never computed;
the oracle reports ``has_energy = False``.

Connectivity never changes.  If a rescaled triangle violates the triangle
inequality, evaluation raises :class:`DomainError`.
"""

from __future__ import annotations

import dataclasses
import math
from importlib import resources
from pathlib import Path

import numpy as np

from gradnewton.errors import DomainError, InvalidInputError, MeshError
from gradnewton.linalg import ConstraintSpec
from gradnewton.oracle import Oracle

GAUSS_BONNET_TOL = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Closed manifold triangle mesh described by connectivity and edge lengths.

    ``edges`` holds sorted vertex pairs; ``face_edges[f, c]`` is the index of
    the edge opposite corner ``c`` of face ``f`` (the corner at vertex
    ``faces[f, c]``).
    """

    n_vertices: int
    faces: np.ndarray
    edges: np.ndarray
    face_edges: np.ndarray
    edge_lengths: np.ndarray

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @classmethod
    def from_faces(cls, n_vertices: int, faces, length_of) -> "TriangleMesh":
        """Build from faces and a callback ``length_of(face_index, i, j)``.

        The callback is queried once per face side; lengths reported for the
        same edge by its two faces must agree.
        """
        faces = np.asarray(faces, dtype=np.int64)
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise MeshError("faces must be triangles")
        if faces.size and (faces.min() < 0 or faces.max() >= n_vertices):
            raise MeshError("face references a vertex index out of range")
        for f, (a, b, c) in enumerate(faces):
            if a == b or b == c or a == c:
                raise MeshError(f"face {f} repeats a vertex")

        edge_index: dict[tuple[int, int], int] = {}
        edge_faces: list[int] = []
        lengths: list[float] = []
        face_edges = np.empty_like(faces)
        for f, tri in enumerate(faces):
            for c in range(3):
                i, j = int(tri[(c + 1) % 3]), int(tri[(c + 2) % 3])
                key = (min(i, j), max(i, j))
                ell = float(length_of(f, i, j))
                if not (math.isfinite(ell) and ell > 0.0):
                    raise MeshError(f"edge {key} has non-positive length {ell!r}")
                e = edge_index.get(key)
                if e is None:
                    e = edge_index[key] = len(lengths)
                    lengths.append(ell)
                    edge_faces.append(0)
                elif abs(lengths[e] - ell) > 1e-9 * max(lengths[e], ell):
                    raise MeshError(
                        f"edge {key} given inconsistent lengths {lengths[e]!r} and {ell!r}"
                    )
                edge_faces[e] += 1
                face_edges[f, c] = e

        bad = [k for k, e in edge_index.items() if edge_faces[e] != 2]
        if bad:
            raise MeshError(
                f"mesh is not a closed manifold: edge {bad[0]} borders "
                f"{edge_faces[edge_index[bad[0]]]} face(s)"
            )
        used = np.zeros(n_vertices, dtype=bool)
        used[faces.ravel()] = True
        if not used.all():
            raise MeshError(f"vertex {int(np.argmin(used))} is not referenced by any face")

        edges = np.array(sorted(edge_index, key=edge_index.get), dtype=np.int64).reshape(-1, 2)
        mesh = cls(n_vertices, faces, edges, face_edges, np.array(lengths))
        for arr in (mesh.faces, mesh.edges, mesh.face_edges, mesh.edge_lengths):
            arr.setflags(write=False)
        # raises DomainError naming the face if the original metric is invalid
        corner_angles(mesh, mesh.edge_lengths)
        return mesh

    @classmethod
    def from_positions(cls, positions, faces) -> "TriangleMesh":
        positions = np.asarray(positions, dtype=float)

        def length_of(f, i, j):
            return np.linalg.norm(positions[i] - positions[j])

        return cls.from_faces(positions.shape[0], faces, length_of)


def load_obj(path) -> TriangleMesh:
    """Read a triangulated Wavefront OBJ; edge lengths come from positions."""
    positions = []
    faces = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                try:
                    positions.append([float(x) for x in parts[1:4]])
                except ValueError:
                    raise MeshError(f"{path}:{lineno}: bad vertex line") from None
                if len(positions[-1]) != 3:
                    raise MeshError(f"{path}:{lineno}: vertex needs 3 coordinates")
            elif parts[0] == "f":
                if len(parts) != 4:
                    raise MeshError(
                        f"{path}:{lineno}: face with {len(parts) - 1} vertices; only triangles are supported"
                    )
                try:
                    # "f 1/1/1 2/2/2 3/3/3" -> keep vertex index only
                    faces.append([int(p.split("/")[0]) - 1 for p in parts[1:]])
                except ValueError:
                    raise MeshError(f"{path}:{lineno}: bad face line") from None
    if not faces:
        raise MeshError(f"{path}: no faces")
    return TriangleMesh.from_positions(np.array(positions), faces)


def load_lenmesh(path) -> TriangleMesh:
    """Read the plain length format: ``lenmesh V F`` then ``i j k l_ij l_jk l_ki``."""
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0][0] != "lenmesh" or len(lines[0]) != 3:
        raise MeshError(f"{path}: missing 'lenmesh V F' header")
    try:
        n_vertices, n_faces = int(lines[0][1]), int(lines[0][2])
    except ValueError:
        raise MeshError(f"{path}: bad header") from None
    body = lines[1:]
    if len(body) != n_faces:
        raise MeshError(f"{path}: header announces {n_faces} faces, found {len(body)}")
    faces, side_lengths = [], []
    for row in body:
        if len(row) != 6:
            raise MeshError(f"{path}: face line needs 'i j k l_ij l_jk l_ki'")
        try:
            faces.append([int(x) for x in row[:3]])
            side_lengths.append([float(x) for x in row[3:]])
        except ValueError:
            raise MeshError(f"{path}: bad face line {' '.join(row)!r}") from None

    def length_of(f, i, j):
        tri = faces[f]
        for s in range(3):
            a, b = tri[s], tri[(s + 1) % 3]
            if {a, b} == {i, j}:
                return side_lengths[f][s]
        raise AssertionError("unreachable")

    return TriangleMesh.from_faces(n_vertices, faces, length_of)


def load_mesh(path) -> TriangleMesh:
    """Dispatch on content: ``lenmesh`` header, otherwise OBJ."""
    with open(path) as fh:
        first = fh.readline().split()
    if first and first[0] == "lenmesh":
        return load_lenmesh(path)
    return load_obj(path)


def builtin_mesh_path(name: str) -> Path:
    with resources.as_file(resources.files("gradnewton") / "data" / f"{name}.obj") as p:
        return Path(p)


def regular_tetrahedron() -> TriangleMesh:
    return load_obj(builtin_mesh_path("tetrahedron"))


def icosahedron() -> TriangleMesh:
    return load_obj(builtin_mesh_path("icosahedron"))


def scaled_lengths(mesh: TriangleMesh, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    return mesh.edge_lengths * np.exp(0.5 * (u[i] + u[j]))


def _face_sides(mesh: TriangleMesh, lengths) -> np.ndarray:
    """(F, 3) array of side lengths, column c opposite corner c."""
    sides = np.asarray(lengths, dtype=float)[mesh.face_edges]
    a, b, c = sides[:, 0], sides[:, 1], sides[:, 2]
    slack = np.minimum.reduce([b + c - a, a + c - b, a + b - c])
    bad = np.flatnonzero(~(slack > 0.0))
    if bad.size:
        f = int(bad[0])
        raise DomainError(
            f"face {f} {mesh.faces[f].tolist()} violates the triangle inequality "
            f"(sides {sides[f].tolist()})"
        )
    return sides


def corner_angles(mesh: TriangleMesh, lengths) -> np.ndarray:
    """(F, 3) interior angles; column c is the angle at vertex ``faces[:, c]``."""
    sides = _face_sides(mesh, lengths)
    s = 0.5 * sides.sum(axis=1, keepdims=True)
    # half-angle formula: stable for needle-shaped triangles
    rest = s - sides
    num = np.sqrt(np.roll(rest, -1, axis=1) * np.roll(rest, -2, axis=1))
    den = np.sqrt(s * rest)
    return 2.0 * np.arctan2(num, den)


def angle_sums(mesh: TriangleMesh, u) -> np.ndarray:
    angles = corner_angles(mesh, scaled_lengths(mesh, u))
    return np.bincount(mesh.faces.ravel(), weights=angles.ravel(), minlength=mesh.n_vertices)


def conformal_gradient(mesh: TriangleMesh, u, theta_hat) -> np.ndarray:
    return np.asarray(theta_hat, dtype=float) - angle_sums(mesh, u)


def cotan_weights(mesh: TriangleMesh, u) -> np.ndarray:
    """Per-edge ``(cot alpha + cot beta) / 2`` over the two opposite angles."""
    angles = corner_angles(mesh, scaled_lengths(mesh, u))
    cot = 1.0 / np.tan(angles)
    return 0.5 * np.bincount(mesh.face_edges.ravel(), weights=cot.ravel(), minlength=mesh.n_edges)


def conformal_hessian(mesh: TriangleMesh, u, theta_hat=None) -> np.ndarray:
    """Cotan Laplacian of the rescaled metric (``theta_hat`` does not enter)."""
    w = cotan_weights(mesh, u)
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    H = np.zeros((mesh.n_vertices, mesh.n_vertices))
    np.add.at(H, (i, j), -w)
    np.add.at(H, (j, i), -w)
    np.add.at(H, (i, i), w)
    np.add.at(H, (j, j), w)
    return H


@dataclasses.dataclass(frozen=True)
class GaussBonnetReport:
    total_curvature: float
    expected: float
    defect: float
    feasible: bool


def check_gauss_bonnet(mesh: TriangleMesh, theta_hat) -> GaussBonnetReport:
    """Compare total prescribed curvature ``sum(2 pi - theta_hat)`` with ``2 pi chi``."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    total = float(np.sum(2.0 * np.pi - theta_hat))
    expected = 2.0 * np.pi * mesh.euler_characteristic
    defect = total - expected
    return GaussBonnetReport(total, expected, defect, abs(defect) <= GAUSS_BONNET_TOL)


def uniform_targets(mesh: TriangleMesh) -> np.ndarray:
    """Split the Gauss-Bonnet total curvature equally over all vertices."""
    k = 2.0 * np.pi * mesh.euler_characteristic / mesh.n_vertices
    return np.full(mesh.n_vertices, 2.0 * np.pi - k)


def perturbed_targets(mesh: TriangleMesh, seed: int = 0, magnitude: float = 0.2) -> np.ndarray:
    """Current angle sums plus a zero-sum perturbation of max-abs ``magnitude``."""
    rng = np.random.default_rng(seed)
    delta = rng.uniform(-1.0, 1.0, mesh.n_vertices)
    delta -= delta.mean()
    delta *= magnitude / np.abs(delta).max()
    return angle_sums(mesh, np.zeros(mesh.n_vertices)) + delta


def load_targets(spec: str, mesh: TriangleMesh, seed: int = 0) -> np.ndarray:
    """Resolve a target description.

    Accepts ``uniform``, ``perturbed`` / ``perturbed:<magnitude>`` (seeded by
    ``seed``), or a path to a file with one angle sum (radians) per line.
    """
    if spec == "uniform":
        return uniform_targets(mesh)
    if spec == "perturbed" or spec.startswith("perturbed:"):
        magnitude = float(spec.split(":", 1)[1]) if ":" in spec else 0.2
        return perturbed_targets(mesh, seed, magnitude)
    values = []
    with open(spec) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                values.append(float(line))
    theta_hat = np.array(values)
    if theta_hat.shape != (mesh.n_vertices,):
        raise InvalidInputError(
            f"{spec}: expected {mesh.n_vertices} target angle sums, got {theta_hat.size}"
        )
    if not np.all(np.isfinite(theta_hat)) or np.any(theta_hat <= 0.0):
        raise InvalidInputError(f"{spec}: target angle sums must be positive and finite")
    return theta_hat


class ConformalProblem(Oracle):
    """Oracle for the prescribed-angle-sum problem; pins ``u[0]`` by default."""

    has_energy = False

    def __init__(self, mesh: TriangleMesh, theta_hat, pinned_index: int = 0):
        theta_hat = np.array(theta_hat, dtype=float)
        if theta_hat.shape != (mesh.n_vertices,):
            raise InvalidInputError("need one target angle sum per vertex")
        super().__init__(mesh.n_vertices)
        self.mesh = mesh
        self.theta_hat = theta_hat
        self.theta_hat.setflags(write=False)
        self.natural_constraint = ConstraintSpec(pinned_index)

    def gauss_bonnet(self) -> GaussBonnetReport:
        return check_gauss_bonnet(self.mesh, self.theta_hat)

    def _gradient(self, u):
        return conformal_gradient(self.mesh, u, self.theta_hat)

    def _hessian(self, u):
        return conformal_hessian(self.mesh, u)
