"""Shared helpers: drive OLSR message exchange over a fixed graph."""

from manetsim.olsr import OlsrState, emit_hello, emit_tc, process_hello, receive_tc


def converge(graph, t=0.0, rounds=3):
    """Drive HELLO and TC exchange over a fixed graph; returns (states, t)."""
    states = {v: OlsrState(v) for v in graph}
    for _ in range(rounds):
        for v in sorted(graph):
            msg = emit_hello(states[v], t)
            for u in graph[v]:
                process_hello(states[u], msg, t)
        t += 1.0
    for _ in range(2):
        for v in sorted(graph):
            msg = emit_tc(states[v], t)
            if msg is None:
                continue
            frontier = [(v, msg)]
            while frontier:
                sender, m = frontier.pop(0)
                for u in sorted(graph[sender]):
                    fwd = receive_tc(states[u], m, sender, t)
                    if fwd is not None:
                        frontier.append((u, fwd))
        t += 1.0
    return states, t
