"""roomkit: multi-protocol collaborative sessions plus a distributed card-game layer.

Layers, bottom up:

- wire: the frame/envelope codec every transport carries
- transport: interchangeable mem/tcp/ws channels behind one factory
- discovery: advertise/scan rooms over udp and mem media
- room: server rooms with tokens, rejoin, timeout, and observer fan-out
- cardgame: generic cards + the coordinator/player split over any room
- tressette: the concrete 4-player partnership game
- cli: host/scan/join/simulate entry points
"""

__version__ = "0.1.0"
