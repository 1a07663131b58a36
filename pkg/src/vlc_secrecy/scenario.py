"""Bundle of everything that describes one physical setup."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .channel import ChannelConstants, DriveConfig, OpticalFrontEnd, channel_constant, zeta
from .geometry import IntensityField, RoomConfig, TransmitterLayout

__all__ = ["Scenario"]


@dataclass(frozen=True)
class Scenario:
    room: RoomConfig
    layout: TransmitterLayout
    front_end: OpticalFrontEnd
    drive: DriveConfig
    field: IntensityField

    def __post_init__(self):
        if not self.layout.inside(self.room):
            raise ValueError("transmitter positions fall outside the room")

    @cached_property
    def cc(self) -> ChannelConstants:
        return channel_constant(self.front_end, self.room.height)

    @property
    def phi_coef(self) -> float:
        return self.drive.phi_coef

    @property
    def zeta(self) -> float:
        return zeta(self.drive, self.cc)
