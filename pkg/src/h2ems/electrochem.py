"""Nonlinear PEM electrolyzer and fuel-cell models.

Implements the exact electrochemical relations for a proton-exchange-membrane
electrolyzer stack and fuel-cell stack: polarization curves (Nernst potential
plus activation, ohmic and concentration terms), the Faraday-law current to
hydrogen mass-flow coupling, stack power curves, and their inverses.

Conventions:
    - All cell math is per cell; stack quantities scale by the cell count at
      the power/hydrogen interface only (series stack, common current).
    - Currents in A, current densities in A/cm2, voltages in V, powers in W,
      hydrogen mass flow in kg/s, pressures in bar, temperatures in K.
    - The electrolyzer concentration term diverges at the limiting current
      density, so its operating domain is capped at a configurable fraction
      of the limiting current (``current_cap_fraction``).
    - The fuel-cell stack power peaks strictly before the limiting current;
      the invertible operating domain is [0, I*] with I* the power argmax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache


class DomainError(ValueError):
    """Operating point outside a device's valid domain."""


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants shared by both device models.

    ``gas_constant_J`` feeds the Nernst/Tafel voltage terms while
    ``gas_constant_m3bar`` feeds the ideal-gas hydrogen coefficient; both
    representations of R are stored explicitly because the two uses mix
    unit systems.
    """

    faraday: float = 96485.0            # C/mol
    gas_constant_J: float = 8.314       # J/(mol K)
    gas_constant_m3bar: float = 8.314e-5  # m3 bar / (K mol)
    hhv_hydrogen: float = 1.42e5        # kJ/kg, higher heating value of H2


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class ElectrolyzerParams:
    """PEM electrolyzer cell/stack parameters.

    Defaults describe a 150-cell stack at 353 K. ``current_cap_fraction``
    keeps the concentration overvoltage finite by restricting operation to
    that fraction of the limiting current density.
    """

    n_cells: int = 150
    temperature: float = 353.0          # K
    p_h2: float = 1.0                   # bar
    p_o2: float = 0.5                   # bar
    p_h2o: float = 0.5                  # bar
    gibbs_energy: float = 233.102       # kJ/mol
    alpha: float = 0.2993               # charge transfer rate
    j0: float = 13.4776e-6              # A/cm2, exchange current density
    area: float = 160.0                 # cm2
    internal_resistance: float = 0.2614  # ohm cm2
    j_max: float = 2.146                # A/cm2, limiting current density
    h2_density: float = 0.07            # kg/m3 at operating conditions
    current_cap_fraction: float = 0.99

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not (0.0 < self.current_cap_fraction < 1.0):
            raise ValueError("current_cap_fraction must be in (0, 1)")
        if self.j0 >= self.j_max:
            raise ValueError("exchange current density must be below j_max")
        for name in ("n_cells", "temperature", "p_h2", "p_o2", "p_h2o",
                     "gibbs_energy", "j0", "area", "internal_resistance",
                     "j_max", "h2_density"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def i_cap(self) -> float:
        """Capped per-cell current bound (A)."""
        return self.current_cap_fraction * self.area * self.j_max


@dataclass(frozen=True)
class FuelCellParams:
    """PEM fuel-cell cell/stack parameters (300-cell stack at 343 K).

    ``zeta1..zeta4`` are the empirical activation-loss coefficients;
    ``i_epsilon`` guards the ln(I) singularity of the activation term:
    below it the cell is treated as open circuit with zero power.
    """

    n_cells: int = 300
    temperature: float = 343.0          # K
    p_h2: float = 1.0                   # bar
    p_o2: float = 1.0                   # bar
    zeta1: float = -0.948
    zeta2: float = 0.00354
    zeta3: float = 7.6e-5
    zeta4: float = -1.93e-4
    r_contact: float = 0.0003           # ohm
    area: float = 232.0                 # cm2
    membrane_thickness: float = 0.0178  # cm
    resistivity: float = 9.5            # ohm cm
    b_coeff: float = 0.016              # V
    j_max: float = 1.5                  # A/cm2
    molar_mass_h2: float = 2e-3         # kg/mol
    i_epsilon: float = 1e-9             # A, open-circuit guard

    def __post_init__(self):
        for name in ("area", "j_max", "molar_mass_h2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if not (0.0 < self.i_epsilon < self.area * self.j_max):
            raise ValueError("i_epsilon must be positive and far below the "
                             "limiting current")

    @property
    def i_limit(self) -> float:
        """Limiting per-cell current A^f * J^f_max (A)."""
        return self.area * self.j_max

    @property
    def membrane_resistance(self) -> float:
        """Equivalent membrane resistance rho_M * l / A^f (ohm)."""
        return self.resistivity * self.membrane_thickness / self.area


_BISECT_TOL_A = 1e-9
_BISECT_MAX_ITER = 100
_REL_SLACK = 1e-9  # tolerance for domain checks on float inputs


# ---------------------------------------------------------------------------
# Electrolyzer
# ---------------------------------------------------------------------------

def electrolyzer_voltage(i: float, params: ElectrolyzerParams = ElectrolyzerParams(),
                         constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Per-cell electrolyzer voltage at current ``i`` (A).

    Sum of the open-circuit (Nernst) potential and the activation, ohmic and
    concentration overvoltages. Strictly increasing in current. Raises
    :class:`DomainError` above the capped limiting current, where the
    concentration term approaches its singularity.
    """
    cap = params.i_cap
    if i < 0 or i > cap * (1.0 + _REL_SLACK):
        raise DomainError(f"electrolyzer current {i} A outside [0, {cap}] A")
    i = min(i, cap)
    rt_2f = constants.gas_constant_J * params.temperature / (2.0 * constants.faraday)
    v_nernst = (params.gibbs_energy * 1e3 / (2.0 * constants.faraday)
                + rt_2f * math.log(params.p_h2 * math.sqrt(params.p_o2) / params.p_h2o))
    j = i / params.area
    v_act = rt_2f / params.alpha * math.asinh(j / (2.0 * params.j0))
    v_ohm = j * params.internal_resistance
    v_con = rt_2f * math.log(params.j_max / (params.j_max - j))
    return v_nernst + v_act + v_ohm + v_con


def electrolyzer_power(i: float, params: ElectrolyzerParams = ElectrolyzerParams(),
                       constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Stack power n * i * V(i) in W drawn at per-cell current ``i`` (A)."""
    if i == 0.0:
        return 0.0
    return params.n_cells * i * electrolyzer_voltage(i, params, constants)


def hydrogen_coefficient_e(params: ElectrolyzerParams = ElectrolyzerParams(),
                           constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Faraday-law hydrogen coefficient k_e = T R d_H2 / (2 F p_H2) in kg/C.

    Uses the m3*bar gas-constant representation; the production rate of the
    stack is then h = k_e * n_cells * i. Computed from the constituent
    constants rather than read as a literal.
    """
    return (params.temperature * constants.gas_constant_m3bar * params.h2_density
            / (2.0 * constants.faraday * params.p_h2))


def electrolyzer_power_max(params: ElectrolyzerParams = ElectrolyzerParams(),
                           constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Stack power (W) at the capped limiting current."""
    return electrolyzer_power(params.i_cap, params, constants)


def f_e(p_stack: float, params: ElectrolyzerParams = ElectrolyzerParams(),
        constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Hydrogen production rate (kg/s) of the stack at electrical input
    ``p_stack`` (W).

    Inverts the strictly increasing stack power curve by bisection
    (tolerance 1e-9 A) and applies the Faraday-law coefficient.
    """
    if p_stack < 0:
        raise DomainError(f"electrolyzer power {p_stack} W negative")
    if p_stack == 0.0:
        return 0.0
    p_max = electrolyzer_power_max(params, constants)
    if p_stack > p_max * (1.0 + _REL_SLACK):
        raise DomainError(f"electrolyzer power {p_stack} W above stack max {p_max} W")
    p_stack = min(p_stack, p_max)
    i = _bisect_increasing(lambda x: electrolyzer_power(x, params, constants),
                           p_stack, 0.0, params.i_cap)
    return hydrogen_coefficient_e(params, constants) * params.n_cells * i


def f_e_inverse(h_stack: float, params: ElectrolyzerParams = ElectrolyzerParams(),
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Electrical input (W) that produces stack hydrogen rate ``h_stack``
    (kg/s). Closed form: current from Faraday's law, power from the
    polarization curve; exact up to float rounding."""
    if h_stack < 0:
        raise DomainError(f"hydrogen rate {h_stack} negative")
    if h_stack == 0.0:
        return 0.0
    k_e = hydrogen_coefficient_e(params, constants)
    i = h_stack / (k_e * params.n_cells)
    if i > params.i_cap * (1.0 + _REL_SLACK):
        raise DomainError(f"hydrogen rate {h_stack} kg/s above stack max "
                          f"{k_e * params.n_cells * params.i_cap} kg/s")
    return electrolyzer_power(min(i, params.i_cap), params, constants)


# ---------------------------------------------------------------------------
# Fuel cell
# ---------------------------------------------------------------------------

def fuel_cell_voltage(i: float, params: FuelCellParams = FuelCellParams(),
                      constants: PhysicalConstants = DEFAULT_CONSTANTS,
                      *, enforce_invertible: bool = True) -> float:
    """Per-cell fuel-cell voltage at current ``i`` (A).

    Nernst potential minus activation, ohmic and concentration losses, with
    the oxygen concentration at the cathode interface from its Arrhenius
    expression. Below ``i_epsilon`` the open-circuit voltage is returned.
    By default currents beyond the stack power argmax I* raise
    :class:`DomainError` (non-invertible region); pass
    ``enforce_invertible=False`` to evaluate the raw curve up to the
    limiting current.
    """
    if i < 0 or i >= params.i_limit:
        raise DomainError(f"fuel-cell current {i} A outside [0, {params.i_limit}) A")
    if enforce_invertible:
        i_star = fuel_cell_current_opt(params, constants)
        if i > i_star * (1.0 + _REL_SLACK):
            raise DomainError(f"fuel-cell current {i} A beyond power argmax {i_star} A")
    v_nernst = (1.229 - 0.85e-3 * (params.temperature - 298.15)
                + 4.31e-5 * (math.log(params.p_h2) + 0.5 * math.log(params.p_o2)))
    if i < params.i_epsilon:
        return v_nernst
    c_o2 = params.p_o2 / (5.08e6 * math.exp(-498.0 / params.temperature))
    t = params.temperature
    v_act = -(params.zeta1 + params.zeta2 * t + params.zeta3 * t * math.log(c_o2)
              + params.zeta4 * t * math.log(i))
    v_ohm = i * (params.r_contact + params.membrane_resistance)
    j = i / params.area
    v_con = -params.b_coeff * math.log(1.0 - j / params.j_max)
    return v_nernst - v_act - v_ohm - v_con


def fuel_cell_power(i: float, params: FuelCellParams = FuelCellParams(),
                    constants: PhysicalConstants = DEFAULT_CONSTANTS,
                    *, enforce_invertible: bool = True) -> float:
    """Stack power n * i * V(i) in W delivered at per-cell current ``i`` (A).

    Identically zero below the ``i_epsilon`` guard (open circuit); the
    i*ln(i) product vanishes there anyway.
    """
    if 0.0 <= i < params.i_epsilon:
        return 0.0
    return params.n_cells * i * fuel_cell_voltage(
        i, params, constants, enforce_invertible=enforce_invertible)


def hydrogen_coefficient_f(params: FuelCellParams = FuelCellParams(),
                           constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Faraday-law coefficient k_f = 2F / M_H2 in C/kg; stack current is
    i = k_f * h / n_cells. Computed from constituents, never a literal."""
    return 2.0 * constants.faraday / params.molar_mass_h2


@lru_cache(maxsize=32)
def fuel_cell_current_opt(params: FuelCellParams = FuelCellParams(),
                          constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Per-cell current I* (A) maximizing stack power.

    The cell voltage collapses toward the limiting current, so i*V(i) has a
    unique interior maximum; located by golden-section search to 1e-8 A.
    The operating (invertible) fuel-cell domain is [0, I*].
    """
    def p(i: float) -> float:
        return i * fuel_cell_voltage(i, params, constants, enforce_invertible=False)

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = params.i_epsilon, params.i_limit * (1.0 - 1e-12)
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = p(c), p(d)
    while b - a > 1e-8:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = p(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = p(d)
    return 0.5 * (a + b)


def fuel_cell_power_max(params: FuelCellParams = FuelCellParams(),
                        constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Stack power (W) at the argmax current I*."""
    return fuel_cell_power(fuel_cell_current_opt(params, constants), params, constants)


def fuel_cell_h_max(params: FuelCellParams = FuelCellParams(),
                    constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Largest invertible stack hydrogen intake (kg/s): n * I* / k_f."""
    return (params.n_cells * fuel_cell_current_opt(params, constants)
            / hydrogen_coefficient_f(params, constants))


def f_f(h_stack: float, params: FuelCellParams = FuelCellParams(),
        constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Stack electrical output (W) for hydrogen intake ``h_stack`` (kg/s).

    Closed form: Faraday's law gives the cell current, the polarization
    curve the voltage. f_f(0) = 0 by the open-circuit convention.
    """
    if h_stack < 0:
        raise DomainError(f"hydrogen rate {h_stack} negative")
    if h_stack == 0.0:
        return 0.0
    h_max = fuel_cell_h_max(params, constants)
    if h_stack > h_max * (1.0 + _REL_SLACK):
        raise DomainError(f"hydrogen rate {h_stack} kg/s above invertible max {h_max} kg/s")
    i = hydrogen_coefficient_f(params, constants) * min(h_stack, h_max) / params.n_cells
    i_star = fuel_cell_current_opt(params, constants)
    return fuel_cell_power(min(i, i_star), params, constants)


def f_f_inverse(p_stack: float, params: FuelCellParams = FuelCellParams(),
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Hydrogen intake (kg/s) required for stack output ``p_stack`` (W).

    Bisection on the increasing power branch [0, I*]; round-trip error
    through :func:`f_f` stays within 1e-6 relative.
    """
    if p_stack < 0:
        raise DomainError(f"fuel-cell power {p_stack} W negative")
    if p_stack == 0.0:
        return 0.0
    p_max = fuel_cell_power_max(params, constants)
    if p_stack > p_max * (1.0 + _REL_SLACK):
        raise DomainError(f"fuel-cell power {p_stack} W above stack max {p_max} W")
    p_stack = min(p_stack, p_max)
    i_star = fuel_cell_current_opt(params, constants)
    i = _bisect_increasing(
        lambda x: fuel_cell_power(x, params, constants, enforce_invertible=False),
        p_stack, 0.0, i_star)
    return params.n_cells * i / hydrogen_coefficient_f(params, constants)


# ---------------------------------------------------------------------------
# Shared
# ---------------------------------------------------------------------------

def device_power_limits(params_e: ElectrolyzerParams = ElectrolyzerParams(),
                        params_f: FuelCellParams = FuelCellParams(),
                        cap_e_kw: float = float("inf"),
                        cap_f_kw: float = float("inf"),
                        constants: PhysicalConstants = DEFAULT_CONSTANTS) -> tuple[float, float]:
    """Effective stack power bounds (kW): min of the configured cap and the
    physical stack maximum (capped current for the electrolyzer, power
    argmax for the fuel cell)."""
    if cap_e_kw < 0 or cap_f_kw < 0:
        raise ValueError("configured power caps must be nonnegative")
    phys_e = electrolyzer_power_max(params_e, constants) / 1e3
    phys_f = fuel_cell_power_max(params_f, constants) / 1e3
    return min(cap_e_kw, phys_e), min(cap_f_kw, phys_f)


def _bisect_increasing(fn, target: float, lo: float, hi: float) -> float:
    """Solve fn(x) = target for increasing fn on [lo, hi] to 1e-9 absolute."""
    flo = fn(lo)
    fhi = fn(hi)
    if target <= flo:
        return lo
    if target >= fhi:
        return hi
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if hi - lo <= _BISECT_TOL_A:
            return mid
        if fn(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
