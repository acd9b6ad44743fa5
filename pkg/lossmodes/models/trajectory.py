"""Trajectory datamodel."""


from __future__ import annotations
from typing import Any

import numpy as np
import pandas as pd

from lossmodes.errors import DataError
from lossmodes.models.system import EnergyBreakdown, State


class Trajectory:
    """Time samples of an integrated motion.

    Available Properties
    --------------------
    - times
    - states
    - energies
    - virial
    - beta
    """

    def __init__(self, times: np.ndarray, states: list[State],
                 energies: list[EnergyBreakdown], virial: np.ndarray,
                 beta: float):
        times = np.asarray(times, dtype=float)
        assert len(states) == len(energies) == times.size == len(virial)
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise DataError("trajectory times must be strictly increasing")
        self.__times = times
        self.__states = tuple(states)
        self.__energies = tuple(energies)
        self.__virial = np.asarray(virial, dtype=complex)
        self.__beta = float(beta)

    def __str__(self):
        return f"Trajectory({self.__times.size} samples, " \
               f"t in [{self.__times[0]:g}, {self.__times[-1]:g}], " \
               f"beta={self.__beta:g})"

    def __len__(self):
        return int(self.__times.size)

    @property
    def times(self) -> np.ndarray:
        return self.__times

    @property
    def states(self) -> tuple[State, ...]:
        return self.__states

    @property
    def energies(self) -> tuple[EnergyBreakdown, ...]:
        return self.__energies

    @property
    def virial(self) -> np.ndarray:
        """Get G = (alpha Q', Q) at every sample."""
        return self.__virial

    @property
    def beta(self) -> float:
        return self.__beta

    def column(self, name: str) -> np.ndarray:
        """One energetic quantity ("kinetic", "total", ...) as an array."""
        return np.array([getattr(e, name) for e in self.__energies])

    def q_matrix(self) -> np.ndarray:
        """Coordinates as a (samples) x N complex array."""
        return np.array([s.q_vec for s in self.__states])

    def to_frame(self) -> pd.DataFrame:
        """Columns t, re_q{i}, im_q{i}, re_qdot{i}, im_qdot{i}, T, V, H,
        dissipated_power, re_G, im_G."""
        q = self.q_matrix()
        qdot = np.array([s.qdot_vec for s in self.__states])
        data: dict[str, Any] = {"t": self.__times}
        for i in range(q.shape[1]):
            data[f"re_q{i}"] = q[:, i].real
            data[f"im_q{i}"] = q[:, i].imag
        for i in range(qdot.shape[1]):
            data[f"re_qdot{i}"] = qdot[:, i].real
            data[f"im_qdot{i}"] = qdot[:, i].imag
        data["T"] = self.column("kinetic")
        data["V"] = self.column("potential")
        data["H"] = self.column("total")
        data["dissipated_power"] = self.column("dissipated_power")
        data["re_G"] = self.__virial.real
        data["im_G"] = self.__virial.imag
        return pd.DataFrame(data)
