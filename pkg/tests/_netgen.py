"""Random net generator shared by the token-game tests and acceptance suite.

Sizes are kept small and exploration caps at or below 120 states so no
place can climb past 255 tokens (max output weight 2 per firing).
"""

import random

from hashnets.petri.net import NetBuilder


def random_net(rng: random.Random, max_places: int = 6, max_transitions: int = 6):
    nb = NetBuilder()
    n_places = rng.randint(1, max_places)
    n_trans = rng.randint(1, max_transitions)
    places = [f"p{i}" for i in range(n_places)]
    for p in places:
        nb.place(p, marking=rng.randint(0, 2))
    for t in range(n_trans):
        tid = f"t{t}"
        nb.transition(tid, label=rng.choice(["", f"l{t}!"]))
        for p in rng.sample(places, rng.randint(0, min(3, n_places))):
            nb.arc(p, tid, rng.randint(1, 3))
        for p in rng.sample(places, rng.randint(0, min(3, n_places))):
            nb.arc(tid, p, rng.randint(1, 2))
    return nb.build()
