"""Small models shared by the simulation tests."""
from campusnet.topology import DeviceKind, Link, LinkKind, NetworkModel, Node, build_campus
from conftest import make_site

FE = LinkKind.FAST_ETHERNET
WS = DeviceKind.WORKSTATION


def star(center_kind, n_hosts, prefix="h"):
    hosts = [Node(f"{prefix}{i}", WS) for i in range(1, n_hosts + 1)]
    center = Node("x", center_kind)
    return NetworkModel([center] + hosts, [Link(h.id, "x", FE) for h in hosts])


def campus(mode, lans=4, hosts=8, sid="erbil"):
    return build_campus(make_site(sid, 36.19, 44.01), lans, hosts, mode)
