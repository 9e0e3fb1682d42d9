"""Model-View-Controller: one model, three views, three controllers.

The model follows the reference SMV text for module `model`; views and
controllers follow the behavior diagrams. Controllers take turns through
the shared `random` variable; an idle controller outputs -1 and the main
module sums the three outputs and adds 2, so exactly the selected
controller's event reaches the model.
"""

from __future__ import annotations

from ..model import ArchitectureSpec, PatternSpec, Property
from ._build import (
    BOOL, F, G, add, and_, arr, array, at, behavior, case, choice, component, define,
    eq, env, gt, idx, interface, land, limplies, mod, ne, or_, rng,
)

VIEWS = ("view1", "view2", "view3")
CONTROLLERS = ("controller1", "controller2", "controller3")
INCREMENTS = (7, 5, 3)

MODEL = interface(
    "model",
    ("in", "service", rng(-1, 2)),
    ("in", "getData", BOOL),
    ("local", "service_ele", rng(-1, 2)),
    ("local", "data", array(0, 2, rng(0, 10))),
    ("out", "output", array(0, 2, rng(-1, 10))),
    ("out", "notificate", BOOL),
)

VIEW = interface(
    "view",
    ("in", "notification", BOOL),
    ("in", "model_data", array(0, 2, rng(-1, 10))),
    ("in", "element", rng(0, 2)),
    ("local", "view_data", rng(0, 10)),
    ("local", "view_ele", rng(0, 2)),
    ("out", "getData", BOOL),
)

CONTROLLER = interface(
    "controller",
    ("in", "contr_id", rng(0, 3)),
    ("in", "random", rng(0, 3)),
    ("local", "event_actual", rng(-1, 2)),
    ("out", "service", rng(-1, 2)),
)


def _data_next(k: int):
    cell = idx("data", k)
    return case((and_(at("Notification"), eq("service_ele", k)), mod(add(cell, INCREMENTS[k]), 10)),
                (True, cell))


MODEL_BEHAVIOR = behavior(
    "model", ["Update", "Notification"], "Update",
    inits=[("service_ele", -1), ("data", arr(7, 5, 3))],
    trans=[("Update", "Notification", ne("service", -1)),
           ("Notification", "Update", True)],
    nexts=[("service_ele", "service"),
           ("data", arr(*(_data_next(k) for k in range(3))))],
    defines=[("output", case(("getData", "data"), (True, arr(-1, -1, -1)))),
             ("notificate", case((at("Notification"), True), (True, False)))],
)


def view_behavior(initial: str = "busy"):
    return behavior(
        "view", ["busy", "idle"], initial,
        inits=[("view_data", 0), ("view_ele", "element")],
        trans=[("busy", "idle", True),
               ("idle", "busy", "notification")],
        nexts=[("view_data", case((at("busy"), idx("model_data", "view_ele")), (True, "view_data")))],
        defines=[("getData", at("busy"))],
    )


CONTROLLER_BEHAVIOR = behavior(
    "controller", ["control"], "control",
    inits=[("event_actual", -1)],
    nexts=[("event_actual", case((eq("random", "contr_id"), choice(-1, 0, 1, 2)), (True, -1)))],
    defines=[("service", case((eq("random", "contr_id"), "event_actual"), (True, -1)))],
)


def architecture() -> ArchitectureSpec:
    instances = []
    for k in range(3):
        instances.append(component(VIEWS[k], "view", notification="model.notificate",
                                   model_data="model.output", element=k))
        instances.append(component(CONTROLLERS[k], "controller", contr_id=k + 1, random="random"))
    instances.append(component("model", "model", service="service", getData="getData"))
    return ArchitectureSpec(
        tuple(instances),
        (env("random", rng(0, 3), 0, choice(1, 2, 3)),),
        (define("service", add(controller_sum(), 2)),
         define("getData", or_(*(f"{v}.getData" for v in VIEWS)))),
    )


def controller_sum():
    return add(add("controller1.service", "controller2.service"), "controller3.service")


def m1():
    """Whenever a controller event reaches the model, every view requests data."""
    return G(limplies(gt(controller_sum(), -3), land(*(F(f"{v}.getData") for v in VIEWS))))


def m2(view: str, x: int):
    """A value of the view's model cell is eventually shown by the view."""
    return G(limplies(eq(idx("model.data", f"{view}.view_ele"), x), F(eq(f"{view}.view_data", x))))


M2_VALUES = range(10)
M2_COUNT = 29


def m2_domain():
    """Views × values 0..9 in view-major order, cut to 29 instances."""
    return [(v, x) for v in VIEWS for x in M2_VALUES][:M2_COUNT]


def properties():
    props = [Property("M1", m1())]
    props += [Property(f"M2@{v},{x}", m2(v, x)) for v, x in m2_domain()]
    return tuple(props)


def build(view_initial: str = "busy", name: str = "mvc") -> PatternSpec:
    return PatternSpec(
        name,
        (MODEL, VIEW, CONTROLLER),
        (MODEL_BEHAVIOR, view_behavior(view_initial), CONTROLLER_BEHAVIOR),
        architecture(),
        properties(),
    )


def mutant_idle() -> PatternSpec:
    """Views start idle and therefore never fetch the initial model data."""
    return build("idle", "mvc_mutant_idle")
