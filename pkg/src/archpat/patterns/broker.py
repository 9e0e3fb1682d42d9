"""Broker: two clients, two servers, one broker and an environment driver.

Servers register with the broker, which acknowledges a registration
request immediately. Clients only talk to the broker. The broker serves
one request at a time: it picks a waiting client round-robin, forwards
the job to a registered server and reports completion back to the client.
Service ids are 1..2 with 0 meaning "no request"; client and server ids
are 0..1.
"""

from __future__ import annotations

from ..model import ArchitectureSpec, PatternSpec, Property
from ._build import (
    BOOL, F, G, and_, arr, array, at, behavior, case, choice, component, eq, idx,
    interface, limplies, lor, ne, or_, rng, sub,
)

CLIENTS = ("client1", "client2")
SERVERS = ("server1", "server2")
SERVICES = (1, 2)

DRIVER = interface(
    "driver",
    ("local", "w1", rng(0, 2)),
    ("local", "w2", rng(0, 2)),
    ("local", "j", BOOL),
    ("out", "want1", rng(0, 2)),
    ("out", "want2", rng(0, 2)),
    ("out", "join", BOOL),
)

CLIENT = interface(
    "client",
    ("in", "want", rng(0, 2)),
    ("in", "served", BOOL),
    ("local", "req", rng(0, 2)),
    ("out", "request", rng(0, 2)),
)

SERVER = interface(
    "server",
    ("in", "join", BOOL),
    ("in", "ack", BOOL),
    ("in", "assigned", BOOL),
    ("in", "job_client_in", rng(0, 1)),
    ("in", "job_service_in", rng(0, 2)),
    ("local", "cl", rng(0, 1)),
    ("local", "sv", rng(0, 2)),
    ("out", "regreq", BOOL),
    ("out", "exec_client", rng(0, 1)),
    ("out", "exec_service", rng(0, 2)),
    ("out", "done", BOOL),
)

BROKER = interface(
    "broker",
    ("in", "req1", rng(0, 2)),
    ("in", "req2", rng(0, 2)),
    ("in", "regreq1", BOOL),
    ("in", "regreq2", BOOL),
    ("in", "done1", BOOL),
    ("in", "done2", BOOL),
    ("local", "reg", array(0, 1, BOOL)),
    ("local", "turn", rng(0, 1)),
    ("local", "client", rng(0, 1)),
    ("local", "service", rng(0, 2)),
    ("local", "server", rng(0, 1)),
    ("out", "pick", rng(0, 1)),
    ("out", "ack1", BOOL),
    ("out", "ack2", BOOL),
    ("out", "registered", array(0, 1, BOOL)),
    ("out", "job_server", rng(0, 1)),
    ("out", "job_client", rng(0, 1)),
    ("out", "job_service", rng(0, 2)),
    ("out", "served1", BOOL),
    ("out", "served2", BOOL),
)

DRIVER_BEHAVIOR = behavior(
    "driver", ["run"], "run",
    inits=[("w1", 0), ("w2", 0), ("j", False)],
    nexts=[("w1", choice(0, 1, 2)), ("w2", choice(0, 1, 2)), ("j", choice(False, True))],
    defines=[("want1", "w1"), ("want2", "w2"), ("join", "j")],
)

CLIENT_BEHAVIOR = behavior(
    "client", ["idle", "waiting"], "idle",
    inits=[("req", 0)],
    trans=[("idle", "waiting", ne("want", 0)),
           ("waiting", "idle", "served")],
    nexts=[("req", case((at("idle"), "want"), (True, "req")))],
    defines=[("request", case((at("waiting"), "req"), (True, 0)))],
)

SERVER_BEHAVIOR = behavior(
    "server", ["offline", "registering", "ready", "busy"], "offline",
    inits=[("cl", 0), ("sv", 0)],
    trans=[("offline", "registering", "join"),
           ("registering", "ready", "ack"),
           ("ready", "busy", "assigned"),
           ("busy", "ready", True)],
    nexts=[("cl", case((and_(at("ready"), "assigned"), "job_client_in"), (True, "cl"))),
           ("sv", case((and_(at("ready"), "assigned"), "job_service_in"), (True, "sv")))],
    defines=[("regreq", at("registering")),
             ("exec_client", "cl"),
             ("exec_service", case((at("busy"), "sv"), (True, 0))),
             ("done", at("busy"))],
)


def _pending():
    return or_(ne("req1", 0), ne("req2", 0))


def _some_registered():
    return or_(idx("reg", 0), idx("reg", 1))


def _server_done():
    return or_(and_(eq("server", 0), "done1"), and_(eq("server", 1), "done2"))


def broker_behavior(acknowledge: bool = True):
    dispatch = and_(at("ready"), _pending(), _some_registered())
    return behavior(
        "broker", ["ready", "dispatched"], "ready",
        inits=[("reg", arr(False, False)), ("turn", 0), ("client", 0), ("service", 0),
               ("server", 0)],
        trans=[("ready", "dispatched", and_(_pending(), _some_registered())),
               ("dispatched", "ready", _server_done())],
        nexts=[("reg", arr(or_(idx("reg", 0), "ack1"), or_(idx("reg", 1), "ack2"))),
               ("turn", case((dispatch, sub(1, "pick")), (True, "turn"))),
               ("client", case((at("ready"), "pick"), (True, "client"))),
               ("service", case((and_(at("ready"), eq("pick", 0)), "req1"),
                                (at("ready"), "req2"), (True, "service"))),
               ("server", case((and_(at("ready"), idx("reg", 0)), 0),
                               (at("ready"), 1), (True, "server")))],
        defines=[("pick", case((and_(eq("turn", 0), ne("req1", 0)), 0), (eq("turn", 0), 1),
                               (ne("req2", 0), 1), (True, 0))),
                 ("ack1", "regreq1" if acknowledge else False),
                 ("ack2", "regreq2" if acknowledge else False),
                 ("registered", "reg"),
                 ("job_server", "server"),
                 ("job_client", "client"),
                 ("job_service", case((at("dispatched"), "service"), (True, 0))),
                 ("served1", and_(at("dispatched"), eq("client", 0), _server_done())),
                 ("served2", and_(at("dispatched"), eq("client", 1), _server_done()))],
    )


def architecture() -> ArchitectureSpec:
    comps = [
        component("client1", "client", want="driver.want1", served="broker.served1"),
        component("client2", "client", want="driver.want2", served="broker.served2"),
    ]
    for k, name in enumerate(SERVERS):
        comps.append(component(
            name, "server",
            join=True if k == 0 else "driver.join",
            ack=f"broker.ack{k + 1}",
            assigned=and_(ne("broker.job_service", 0), eq("broker.job_server", k)),
            job_client_in="broker.job_client",
            job_service_in="broker.job_service",
        ))
    comps.append(component("broker", "broker", req1="client1.request", req2="client2.request",
                           regreq1="server1.regreq", regreq2="server2.regreq",
                           done1="server1.done", done2="server2.done"))
    comps.append(component("driver", "driver"))
    return ArchitectureSpec(tuple(comps))


def b1(client: str, service: int):
    """A client's request is eventually executed by some server."""
    cid = CLIENTS.index(client)
    executed = lor(*(and_(eq(f"{s}.exec_client", cid), eq(f"{s}.exec_service", service))
                     for s in SERVERS))
    return G(limplies(eq(f"{client}.request", service), F(executed)))


def b2(server: str):
    """A server's registration request eventually results in a registration."""
    k = SERVERS.index(server)
    return G(limplies(f"{server}.regreq", F(idx("broker.registered", k))))


def properties():
    props = [Property(f"B1@{c},{s}", b1(c, s)) for c in CLIENTS for s in SERVICES]
    props += [Property(f"B2@{s}", b2(s)) for s in SERVERS]
    return tuple(props)


def build(acknowledge: bool = True, name: str = "broker") -> PatternSpec:
    return PatternSpec(
        name,
        (CLIENT, SERVER, BROKER, DRIVER),
        (CLIENT_BEHAVIOR, SERVER_BEHAVIOR, broker_behavior(acknowledge), DRIVER_BEHAVIOR),
        architecture(),
        properties(),
    )


def mutant_ack() -> PatternSpec:
    """The broker never acknowledges registration requests."""
    return build(False, "broker_mutant_ack")

