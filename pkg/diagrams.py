"""Spacetime diagrams of event logs, rendered through a Jinja2 SVG template."""

import logging
import os

from jinja2 import Environment, FileSystemLoader, select_autoescape

from spacetime import DimensionError, from_fixed

logger = logging.getLogger(__name__)

TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "templates")
WIDTH = 640
HEIGHT = 480
MARGIN = 40

QUANTUM_COLOUR = "#c0392b"
CLASSICAL_COLOUR = "#2c3e50"
BROADCAST_COLOUR = "#2980b9"

env = Environment(
    loader=FileSystemLoader(TEMPLATE_DIR),
    autoescape=select_autoescape(["svg", "html", "xml"]),
    keep_trailing_newline=True,
)


def _fmt(value):
    return f"{float(value):.3f}"


def _axes(coords, times):
    """Maps for position and time sharing one pixels-per-unit factor.

    Light travels one unit of position per unit of time, so signals come out
    at 45 degrees. The shorter span is centred.
    """

    x_lo, t_lo = min(coords), min(times)
    x_span, t_span = max(coords) - x_lo, max(times) - t_lo
    room_x, room_t = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
    factors = [room / span for room, span in ((room_x, x_span), (room_t, t_span)) if span]
    unit = min(factors) if factors else 1
    left = MARGIN + (room_x - x_span * unit) / 2
    bottom = HEIGHT - MARGIN - (room_t - t_span * unit) / 2
    return (lambda x: left + (x - x_lo) * unit), (lambda t: bottom - (t - t_lo) * unit)


def emit_spacetime_svg(log, positions, axis=0, title="spacetime diagram"):
    """SVG with position across and time upwards.

    Each delivery becomes a line from its send event to the receiver, and each
    party a dashed world-line. An empty log renders the bare document.
    """

    positions = dict(positions)
    for pid, point in positions.items():
        if not 0 <= axis < len(point):
            raise DimensionError(f"{pid} has no axis {axis}")

    sends = {event.seq: event for event in log if event.kind == "send"}
    deliveries = [event for event in log if event.kind == "deliver" and event.ref in sends]

    parties, signals = [], []
    if log:
        times = [from_fixed(event.time) for event in log]
        coords = [point[axis] for point in positions.values()]
        x_of, y_of = _axes(coords, times)

        for pid in sorted(positions):
            parties.append({"id": pid, "x": _fmt(x_of(positions[pid][axis]))})
        for event in deliveries:
            send = sends[event.ref]
            if send.qubits:
                colour = QUANTUM_COLOUR
            elif send.mode == "broadcast":
                colour = BROADCAST_COLOUR
            else:
                colour = CLASSICAL_COLOUR
            signals.append({
                "x1": _fmt(x_of(positions[send.party][axis])),
                "y1": _fmt(y_of(from_fixed(send.time))),
                "x2": _fmt(x_of(positions[event.party][axis])),
                "y2": _fmt(y_of(from_fixed(event.time))),
                "colour": colour,
                "label": f"{send.party} -> {event.party}: {event.label}",
            })

    template = env.get_template("spacetime.svg")
    svg = template.render(
        width=WIDTH, height=HEIGHT, top=MARGIN, bottom=HEIGHT - MARGIN,
        title=title, parties=parties, signals=signals,
    )
    logger.debug("rendered %d signals for %d parties", len(signals), len(parties))
    return svg


def write_svg(path, log, positions, axis=0, title="spacetime diagram"):
    with open(path, "w") as out:
        out.write(emit_spacetime_svg(log, positions, axis, title))
