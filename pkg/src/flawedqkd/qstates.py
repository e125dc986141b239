"""Source states of a flawed and leaky transmitter.

The transmitter tries to emit one of four qubit states (two per basis) but
suffers three imperfections:

* an encoding-phase deviation ``delta`` that tilts the qubit states,
* a setting-dependent polarization rotation of magnitude ``theta_hat`` that
  puts amplitude into a second optical mode,
* back-reflected probe light of intensity ``mu`` that tags each pulse with a
  setting-dependent side-channel state.

Every emitted state is split into a qubit part plus an orthogonal rest.  The
decomposition carries the weights of the two parts, the magnitude of their
cross term, the eigenvalue bounds of the non-qubit contribution to any
detection probability, and the Bloch vector of the qubit part.  The same
container describes both the actually sent states and the virtual states
that define phase errors.

All kets are real, so Bloch vectors live in the x-z plane and py is omitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateStateError

VALID_BASES = ("Z", "X")
THETA_MODES = ("independent", "dependent")


@dataclass(frozen=True)
class Setting:
    """One of Alice's encoding choices: a bit and a basis."""

    bit: int
    basis: str

    def __post_init__(self) -> None:
        if self.bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {self.bit!r}")
        if self.basis not in VALID_BASES:
            raise ValueError(f"basis must be one of {VALID_BASES}, got {self.basis!r}")

    def label(self) -> str:
        return f"{self.bit}{self.basis}"


SETTING_0Z = Setting(0, "Z")
SETTING_1Z = Setting(1, "Z")
SETTING_0X = Setting(0, "X")
SETTING_1X = Setting(1, "X")

# The key-generation protocol sends three states; the quantum-coin analysis
# adds the fourth.
THREE_SETTINGS = (SETTING_0Z, SETTING_1Z, SETTING_0X)
FOUR_SETTINGS = (SETTING_0Z, SETTING_1Z, SETTING_0X, SETTING_1X)


@dataclass(frozen=True)
class DeviceModel:
    """Imperfection parameters of the transmitter.

    delta: encoding-phase deviation in radians, in [0, pi).
    theta_hat: polarization-rotation magnitude in radians, in [0, pi/2).
    theta_mode: "dependent" scales the rotation with the encoded phase,
        "independent" applies the same rotation to every setting.
    mu: mean photon number of the back-reflected probe light, >= 0.
    """

    delta: float = 0.0
    theta_hat: float = 0.0
    theta_mode: str = "dependent"
    mu: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta < math.pi:
            raise ValueError(f"delta must lie in [0, pi), got {self.delta}")
        if not 0.0 <= self.theta_hat < math.pi / 2:
            raise ValueError(f"theta_hat must lie in [0, pi/2), got {self.theta_hat}")
        if self.theta_mode not in THETA_MODES:
            raise ValueError(
                f"theta_mode must be one of {THETA_MODES}, got {self.theta_mode!r}"
            )
        if self.mu < 0.0:
            raise ValueError(f"mu must be nonnegative, got {self.mu}")


@dataclass(frozen=True)
class QubitKet:
    """Real amplitudes of a pure qubit state in the Z eigenbasis."""

    c0: float
    c1: float

    def norm_sq(self) -> float:
        return self.c0 * self.c0 + self.c1 * self.c1


@dataclass(frozen=True)
class BlochVector:
    """x and z Bloch components of a real-amplitude qubit state."""

    px: float
    pz: float


@dataclass(frozen=True)
class StateDecomposition:
    """Qubit/side-channel split of one emitted or virtual state.

    qubit_weight and side_weight are the squared amplitudes of the qubit
    part and of everything orthogonal to it; cross_mag is the magnitude of
    their interference term.  lambda_min and lambda_max bound the non-qubit
    contribution to any detection probability, and bloch is the Bloch
    vector of the normalized qubit part.
    """

    qubit_weight: float
    side_weight: float
    cross_mag: float
    lambda_max: float
    lambda_min: float
    bloch: BlochVector


def qubit_state(setting: Setting, delta: float) -> QubitKet:
    """Amplitudes of the intended-but-tilted qubit state for one setting.

    The Z states sit near the poles, the X states near the equator; delta
    tilts every state except 0Z, which is used as the phase reference.
    """
    if setting == SETTING_0Z:
        return QubitKet(1.0, 0.0)
    if setting == SETTING_1Z:
        return QubitKet(-math.sin(delta / 2), math.cos(delta / 2))
    if setting == SETTING_0X:
        a = math.pi / 4 + delta / 4
        return QubitKet(math.cos(a), math.sin(a))
    if setting == SETTING_1X:
        a = 3 * math.pi / 4 + 3 * delta / 4
        return QubitKet(math.cos(a), math.sin(a))
    raise ValueError(f"unknown setting {setting!r}")


def bloch_vector(ket: QubitKet) -> BlochVector:
    """Bloch components (px, pz) of a normalized real ket."""
    if abs(ket.norm_sq() - 1.0) > 1e-9:
        raise ValueError(f"ket is not normalized: |c|^2 = {ket.norm_sq()}")
    return BlochVector(2.0 * ket.c0 * ket.c1, ket.c0 * ket.c0 - ket.c1 * ket.c1)


def mode_angles(device: DeviceModel) -> dict[Setting, float]:
    """Polarization rotation angle applied to each setting.

    In dependent mode the rotation grows with the encoded phase (0 for 0Z,
    pi*theta_hat for 1Z, pi/2*theta_hat for 0X, 3pi/2*theta_hat for 1X); in
    independent mode every setting is rotated by theta_hat.
    """
    th = device.theta_hat
    if device.theta_mode == "independent":
        return {s: th for s in FOUR_SETTINGS}
    return {
        SETTING_0Z: 0.0,
        SETTING_1Z: math.pi * th,
        SETTING_0X: (math.pi / 2) * th,
        SETTING_1X: (3 * math.pi / 2) * th,
    }


def tha_coefficients(mu: float) -> tuple[float, float]:
    """Amplitudes (C_I, C_D) of the leakage-free and leaked components.

    C_I^2 + C_D^2 = 1; mu = 0 gives (1, 0).
    """
    if mu < 0.0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    c_i = math.exp(-mu / 2)
    c_d = math.sqrt(max(1.0 - math.exp(-mu), 0.0))
    return c_i, c_d


def _lambda_bounds(side_weight: float, cross_mag: float) -> tuple[float, float]:
    # Extreme eigenvalues of [[side_weight, cross_mag], [cross_mag, 0]],
    # the worst-case detection contribution of the non-qubit part.
    root = math.sqrt(side_weight * side_weight + 4.0 * cross_mag * cross_mag)
    return (side_weight + root) / 2.0, (side_weight - root) / 2.0


def _require_default_side_channel(side_overlap: float) -> None:
    # Hook for models where distinct side-channel states are known to have
    # nonzero overlap.  Only the worst case (overlap 0) ships.
    if side_overlap != 0.0:
        raise NotImplementedError(
            "only the worst-case side-channel overlap of 0 is implemented"
        )


def actual_decomposition(
    setting: Setting, device: DeviceModel, side_overlap: float = 0.0
) -> StateDecomposition:
    """Decompose one actually emitted state.

    The qubit weight is C_I^2 cos^2(theta) for the setting's rotation angle
    theta; everything else (rotated polarization, leaked light) counts as
    side channel, with worst-case mutually orthogonal side states.
    """
    _require_default_side_channel(side_overlap)
    theta = mode_angles(device)[setting]
    c_i, _ = tha_coefficients(device.mu)
    qubit_weight = (c_i * math.cos(theta)) ** 2
    side_weight = 1.0 - qubit_weight
    cross_mag = math.sqrt(max(qubit_weight * side_weight, 0.0))
    lam_max, lam_min = _lambda_bounds(side_weight, cross_mag)
    return StateDecomposition(
        qubit_weight=qubit_weight,
        side_weight=side_weight,
        cross_mag=cross_mag,
        lambda_max=lam_max,
        lambda_min=lam_min,
        bloch=bloch_vector(qubit_state(setting, device.delta)),
    )


def virtual_decomposition(
    j: int, device: DeviceModel, side_overlap: float = 0.0
) -> StateDecomposition:
    """Decompose the unnormalized virtual state for phase-error bit j.

    The virtual states are the (un-normalized) components of the Z-basis
    source state after Alice measures her ancilla along X.  Their qubit
    weights A_0 + A_1 plus side weights C_0 + C_1 sum to 1.
    """
    if j not in (0, 1):
        raise ValueError(f"j must be 0 or 1, got {j}")
    _require_default_side_channel(side_overlap)
    angles = mode_angles(device)
    t0 = angles[SETTING_0Z]
    t1 = angles[SETTING_1Z]
    c_i, c_d = tha_coefficients(device.mu)
    sgn = 1.0 if j == 0 else -1.0
    s_half = math.sin(device.delta / 2)
    c_half = math.cos(device.delta / 2)

    a_j = 0.25 * c_i * c_i * (
        math.cos(t0) ** 2
        - sgn * 2.0 * math.cos(t0) * math.cos(t1) * s_half
        + math.cos(t1) ** 2
    )
    c_j = 0.25 * (
        c_i * c_i * (
            math.sin(t0) ** 2
            - sgn * 2.0 * math.sin(t0) * math.sin(t1) * s_half
            + math.sin(t1) ** 2
        )
        + 2.0 * c_d * c_d
    )
    if a_j <= 1e-300:
        raise DegenerateStateError(
            f"virtual state j={j} has no qubit component (A_j = {a_j})"
        )
    b_j = math.sqrt(a_j * c_j)
    lam_max, lam_min = _lambda_bounds(c_j, b_j)

    # Bloch vector of the normalized qubit part.  The z component is negated
    # relative to the raw ket so the virtual states are expressed on the
    # measurement axis realized by the receiver model; without the flip the
    # phase error keeps a spurious O(delta^2) floor on a lossless channel.
    denom = 4.0 * a_j / (c_i * c_i)
    px = (
        sgn * 2.0 * math.cos(t0) * math.cos(t1) * c_half
        - 2.0 * math.cos(t1) ** 2 * c_half * s_half
    ) / denom
    pz = (
        math.cos(t1) ** 2 * math.cos(device.delta)
        + sgn * 2.0 * math.cos(t0) * math.cos(t1) * s_half
        - math.cos(t0) ** 2
    ) / denom
    return StateDecomposition(
        qubit_weight=a_j,
        side_weight=c_j,
        cross_mag=b_j,
        lambda_max=lam_max,
        lambda_min=lam_min,
        bloch=BlochVector(px, pz),
    )


def full_overlap(
    s1: Setting, s2: Setting, device: DeviceModel, side_overlap: float = 0.0
) -> float:
    """Inner product of two full emitted states (qubit plus side channels).

    Cross-polarization terms and distinct worst-case leakage states
    contribute nothing, so only the co-polarized leakage-free component
    survives.
    """
    _require_default_side_channel(side_overlap)
    angles = mode_angles(device)
    c_i, _ = tha_coefficients(device.mu)
    k1 = qubit_state(s1, device.delta)
    k2 = qubit_state(s2, device.delta)
    qubit_ov = k1.c0 * k2.c0 + k1.c1 * k2.c1
    return math.cos(angles[s1]) * math.cos(angles[s2]) * c_i * c_i * qubit_ov
