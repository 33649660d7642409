"""Device geometry, structured grid, and region tagging.

A device is an ordered list of axis-aligned regions (boxes and trapezoidal
fin prisms). Later-declared regions win where regions overlap, mirroring the
layer-by-layer build order of the physical device. Rasterization assigns
every grid node to exactly one region by testing node coordinates against
the region shapes (closed boundaries).

The channel mask collects all channel-role nodes; the Schrodinger domain is
that mask eroded by one node layer, so the wave function is pinned to zero
exactly on the geometric channel surface (hard walls).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .materials import MaterialRecord, material_table

ROLES = ("channel", "substrate", "oxide", "gate", "lead-extension")
ELECTRODE_NAMES = ("plunger", "left", "right", "source", "drain")

_EPS = 1e-9  # boundary inclusiveness for containment tests, nm


@dataclass(frozen=True)
class Box:
    x0: float
    x1: float
    y0: float
    y1: float
    z0: float
    z1: float

    def contains(self, x, y, z):
        return ((x >= self.x0 - _EPS) & (x <= self.x1 + _EPS)
                & (y >= self.y0 - _EPS) & (y <= self.y1 + _EPS)
                & (z >= self.z0 - _EPS) & (z <= self.z1 + _EPS))

    def bounds(self):
        return (self.x0, self.x1, self.y0, self.y1, self.z0, self.z1)


@dataclass(frozen=True)
class FinPrism:
    """Trapezoidal prism extruded along x: base width at z0, top width at z0+h.

    A sharp apex is expressed with top_width = 0.
    """
    x0: float
    x1: float
    y_center: float
    base_width: float
    top_width: float
    z0: float
    height: float

    def contains(self, x, y, z):
        t = (z - self.z0) / self.height
        inside_z = (t >= -_EPS) & (t <= 1.0 + _EPS)
        tc = np.clip(t, 0.0, 1.0)
        half_width = 0.5 * (self.base_width + (self.top_width - self.base_width) * tc)
        return ((x >= self.x0 - _EPS) & (x <= self.x1 + _EPS)
                & inside_z & (np.abs(y - self.y_center) <= half_width + _EPS))

    def bounds(self):
        w = 0.5 * max(self.base_width, self.top_width)
        return (self.x0, self.x1, self.y_center - w, self.y_center + w,
                self.z0, self.z0 + self.height)

    def cross_section_area(self):
        return 0.5 * (self.base_width + self.top_width) * self.height


@dataclass(frozen=True)
class Region:
    shape: object                   # Box or FinPrism
    material: str
    role: str
    doping: float = 0.0             # cm^-3, signed: >0 donors, <0 acceptors
    name: str = ""
    electrode: Optional[str] = None
    priority: Optional[int] = None  # equal explicit priorities must not overlap

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"region {self.name!r}: unknown role {self.role!r}")
        if self.electrode is not None and self.electrode not in ELECTRODE_NAMES:
            raise ValueError(f"region {self.name!r}: unknown electrode {self.electrode!r}")


@dataclass
class DeviceGeometry:
    regions: list
    materials: dict = field(default_factory=material_table)
    # face electrodes: name -> ("x-", role) or ("x+", role); Dirichlet nodes are
    # the nodes of that role on the given domain face
    face_electrodes: dict = field(default_factory=dict)
    fin_height: float = 0.0
    fin_base_width: float = 0.0
    fin_top_width: float = 0.0

    def bounds(self):
        bs = np.array([r.shape.bounds() for r in self.regions])
        return (bs[:, 0].min(), bs[:, 1].max(), bs[:, 2].min(),
                bs[:, 3].max(), bs[:, 4].min(), bs[:, 5].max())

    def channel_regions(self):
        return [r for r in self.regions if r.role == "channel"]


@dataclass(frozen=True)
class Grid:
    dx: float
    dy: float
    dz: float
    nx: int
    ny: int
    nz: int
    origin: tuple

    def __post_init__(self):
        if min(self.dx, self.dy, self.dz) <= 0:
            raise ValueError("grid spacings must be positive")

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    @property
    def n_nodes(self):
        return self.nx * self.ny * self.nz

    @property
    def node_volume(self):
        return self.dx * self.dy * self.dz

    def x(self):
        return self.origin[0] + self.dx * np.arange(self.nx)

    def y(self):
        return self.origin[1] + self.dy * np.arange(self.ny)

    def z(self):
        return self.origin[2] + self.dz * np.arange(self.nz)

    def meshgrid(self):
        return np.meshgrid(self.x(), self.y(), self.z(), indexing="ij")

    def spacing(self):
        return (self.dx, self.dy, self.dz)


@dataclass
class RegionMap:
    grid: Grid
    material_index: np.ndarray     # (nx, ny, nz) int
    doping: np.ndarray             # cm^-3 signed
    role_index: np.ndarray         # index into ROLES
    electrode_index: np.ndarray    # -1 where none
    materials: list                # MaterialRecord per material index
    electrode_names: list

    @property
    def channel_mask(self) -> np.ndarray:
        return self.role_index == ROLES.index("channel")

    @property
    def schrodinger_mask(self) -> np.ndarray:
        """Channel mask eroded by one node: hard walls on the channel surface."""
        m = self.channel_mask
        out = m.copy()
        out[1:, :, :] &= m[:-1, :, :]
        out[:-1, :, :] &= m[1:, :, :]
        out[:, 1:, :] &= m[:, :-1, :]
        out[:, :-1, :] &= m[:, 1:, :]
        out[:, :, 1:] &= m[:, :, :-1]
        out[:, :, :-1] &= m[:, :, 1:]
        out[0, :, :] = out[-1, :, :] = False
        out[:, 0, :] = out[:, -1, :] = False
        out[:, :, 0] = out[:, :, -1] = False
        return out

    def role_mask(self, role: str) -> np.ndarray:
        return self.role_index == ROLES.index(role)

    def permittivity(self) -> np.ndarray:
        eps = np.array([m.rel_permittivity for m in self.materials])
        return eps[self.material_index]


def _axis_nodes(lo: float, hi: float, d: float):
    n_cells = (hi - lo) / d
    if abs(n_cells - round(n_cells)) > 0.5:
        raise ValueError(f"spacing {d} nm does not divide extent [{lo}, {hi}] "
                         "to within half a cell")
    return int(round(n_cells)) + 1


def build_grid(geometry: DeviceGeometry, spacings: Sequence[float]):
    """Rasterize a device onto a homogeneous grid.

    Returns (Grid, RegionMap). Every node is assigned to the last-declared
    region containing it; nodes covered by no region are rejected.
    """
    dx, dy, dz = spacings
    x0, x1, y0, y1, z0, z1 = geometry.bounds()
    grid = Grid(dx, dy, dz, _axis_nodes(x0, x1, dx), _axis_nodes(y0, y1, dy),
                _axis_nodes(z0, z1, dz), (x0, y0, z0))
    X, Y, Z = grid.meshgrid()

    material_names = sorted({r.material for r in geometry.regions})
    materials = [geometry.materials[name] for name in material_names]
    mat_idx_of = {name: i for i, name in enumerate(material_names)}

    material_index = np.full(grid.shape, -1, dtype=np.int16)
    doping = np.zeros(grid.shape)
    role_index = np.full(grid.shape, -1, dtype=np.int16)
    electrode_index = np.full(grid.shape, -1, dtype=np.int16)
    electrode_names = list(ELECTRODE_NAMES)

    # explicit equal priorities must not overlap anywhere
    explicit = {}
    for region in geometry.regions:
        if region.priority is not None:
            explicit.setdefault(region.priority, []).append(region)
    for prio, group in explicit.items():
        if len(group) < 2:
            continue
        masks = [r.shape.contains(X, Y, Z) for r in group]
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                if np.any(masks[i] & masks[j]):
                    raise ValueError(
                        f"regions {group[i].name or group[i].material!r} and "
                        f"{group[j].name or group[j].material!r} overlap at equal "
                        f"priority {prio}")

    order = sorted(range(len(geometry.regions)),
                   key=lambda i: (geometry.regions[i].priority
                                  if geometry.regions[i].priority is not None else i, i))
    for i in order:
        region = geometry.regions[i]
        inside = region.shape.contains(X, Y, Z)
        material_index[inside] = mat_idx_of[region.material]
        doping[inside] = region.doping
        role_index[inside] = ROLES.index(region.role)
        if region.electrode is not None:
            electrode_index[inside] = electrode_names.index(region.electrode)

    if np.any(material_index < 0):
        n_bad = int(np.sum(material_index < 0))
        raise ValueError(f"{n_bad} grid nodes are covered by no region")

    for name, (face, role) in geometry.face_electrodes.items():
        sl = (0 if face == "x-" else -1)
        face_role = role_index[sl, :, :] == ROLES.index(role)
        electrode_index[sl, :, :][face_role] = electrode_names.index(name)

    rmap = RegionMap(grid, material_index, doping, role_index, electrode_index,
                     materials, electrode_names)
    if not np.any(rmap.channel_mask):
        raise ValueError("channel mask is empty")
    return grid, rmap


def material_lookup(rmap: RegionMap, node) -> MaterialRecord:
    """Material record of the region a node belongs to. Node is (ix, iy, iz)."""
    ix, iy, iz = node
    shape = rmap.grid.shape
    if not (0 <= ix < shape[0] and 0 <= iy < shape[1] and 0 <= iz < shape[2]):
        raise IndexError(f"node {node} outside grid of shape {shape}")
    return rmap.materials[rmap.material_index[ix, iy, iz]]


def fin_device(base_width: float = 28.0, top_width: float = 6.0,
               fin_height: float = 15.0, channel_length: float = 50.0,
               lead_gate_length: float = 15.0, plunger_length: float = 10.0,
               gap_length: float = 5.0, substrate_height: float = 8.0,
               oxide_thickness: float = 8.0, field_oxide_thickness: float = 4.0,
               gate_height: float = 27.0, cap_length: float = 2.0,
               lateral_margin: float = 6.0, channel_doping: float = -1e14,
               cap_doping: float = -1e20, materials: Optional[dict] = None) -> DeviceGeometry:
    """Triple-gate fin transistor: substrate, trapezoidal Si fin, conformal
    oxide, three wrap gates, and highly doped lead caps at both fin ends.

    Defaults reproduce the 28 nm wide, 15 nm high fin with a 6 nm truncated
    apex; gate lengths are lead/gap/plunger/gap/lead = 15/5/10/5/15 nm.
    """
    if 2 * lead_gate_length + 2 * gap_length + plunger_length != channel_length:
        raise ValueError("gate lengths and gaps must add up to the channel length")
    half_domain_y = 0.5 * base_width + oxide_thickness + lateral_margin
    x_lo, x_hi = -cap_length, channel_length + cap_length
    z_top = substrate_height + gate_height
    fin = dict(y_center=0.0, base_width=base_width, top_width=top_width,
               z0=substrate_height, height=fin_height)

    regions = [
        Region(Box(x_lo, x_hi, -half_domain_y, half_domain_y, 0.0, substrate_height),
               "Si", "substrate", name="substrate"),
        Region(Box(x_lo, x_hi, -half_domain_y, half_domain_y, substrate_height, z_top),
               "SiO2", "oxide", name="filler-oxide"),
    ]
    gate_z0 = substrate_height + field_oxide_thickness
    for name, x0, length in (("left", 0.0, lead_gate_length),
                             ("plunger", lead_gate_length + gap_length, plunger_length),
                             ("right", channel_length - lead_gate_length, lead_gate_length)):
        regions.append(Region(Box(x0, x0 + length, -half_domain_y, half_domain_y,
                                  gate_z0, z_top),
                              "TiN", "gate", name=f"{name}-gate", electrode=name))
    regions.append(Region(FinPrism(x_lo, x_hi, 0.0,
                                   base_width + 2 * oxide_thickness,
                                   top_width + 2 * oxide_thickness,
                                   substrate_height, fin_height + oxide_thickness),
                          "SiO2", "oxide", name="fin-oxide"))
    regions.append(Region(FinPrism(x_lo, 0.0, **fin), "Si", "lead-extension",
                          doping=cap_doping, name="source-cap"))
    regions.append(Region(FinPrism(channel_length, x_hi, **fin), "Si", "lead-extension",
                          doping=cap_doping, name="drain-cap"))
    regions.append(Region(FinPrism(0.0, channel_length, **fin), "Si", "channel",
                          doping=channel_doping, name="fin"))

    return DeviceGeometry(
        regions=regions,
        materials=material_table(materials),
        face_electrodes={"source": ("x-", "lead-extension"),
                         "drain": ("x+", "lead-extension")},
        fin_height=fin_height, fin_base_width=base_width, fin_top_width=top_width,
    )


GEOMETRY_PRESETS = {
    # equal cross-section area (about 260 nm^2), increasing h/B, decreasing b/B
    "geo1": dict(base_width=28.0, top_width=6.0, fin_height=15.0),
    "geo2": dict(base_width=26.0, top_width=4.0, fin_height=17.5),
    "geo3": dict(base_width=21.0, top_width=2.0, fin_height=22.5),
}


def preset_device(name: str, **overrides) -> DeviceGeometry:
    params = dict(GEOMETRY_PRESETS[name])
    params.update(overrides)
    return fin_device(**params)


def test_fin_device(length: float = 12.0, base_width: float = 8.0,
                    top_width: float = 4.0, fin_height: float = 6.0,
                    oxide_thickness: float = 2.0, substrate_height: float = 2.0,
                    gate_height: float = 4.0, plunger_span: float = 8.0,
                    with_caps: bool = False) -> DeviceGeometry:
    """Small fin with a single centered plunger gate; x- and y-mirror symmetric.

    Sized for fast regression runs: the Schrodinger domain stays well below
    30k degrees of freedom at 0.5 nm spacing.
    """
    half_domain_y = 0.5 * base_width + oxide_thickness + 2.0
    cap = 2.0 if with_caps else 0.0
    x_lo, x_hi = -cap, length + cap
    z_top = substrate_height + fin_height + oxide_thickness + gate_height
    gate_x0 = 0.5 * (length - plunger_span)
    fin = dict(y_center=0.0, base_width=base_width, top_width=top_width,
               z0=substrate_height, height=fin_height)

    regions = [
        Region(Box(x_lo, x_hi, -half_domain_y, half_domain_y, 0.0, substrate_height),
               "Si", "substrate", name="substrate"),
        Region(Box(x_lo, x_hi, -half_domain_y, half_domain_y, substrate_height, z_top),
               "SiO2", "oxide", name="filler-oxide"),
        Region(Box(gate_x0, gate_x0 + plunger_span, -half_domain_y, half_domain_y,
                   substrate_height, z_top),
               "TiN", "gate", name="plunger-gate", electrode="plunger"),
        Region(FinPrism(x_lo, x_hi, 0.0, base_width + 2 * oxide_thickness,
                        top_width + 2 * oxide_thickness, substrate_height,
                        fin_height + oxide_thickness),
               "SiO2", "oxide", name="fin-oxide"),
    ]
    if with_caps:
        regions.append(Region(FinPrism(x_lo, 0.0, **fin), "Si", "lead-extension",
                              doping=-1e20, name="source-cap"))
        regions.append(Region(FinPrism(length, x_hi, **fin), "Si", "lead-extension",
                              doping=-1e20, name="drain-cap"))
    regions.append(Region(FinPrism(0.0, length, **fin), "Si", "channel",
                          doping=-1e14, name="fin"))

    face_electrodes = {}
    if with_caps:
        face_electrodes = {"source": ("x-", "lead-extension"),
                           "drain": ("x+", "lead-extension")}
    return DeviceGeometry(regions=regions, materials=material_table(),
                          face_electrodes=face_electrodes,
                          fin_height=fin_height, fin_base_width=base_width,
                          fin_top_width=top_width)
