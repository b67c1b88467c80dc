"""hashnets: compile AHCL coordination configurations to interlaced Petri nets
and analyse them (reachability, deadlocks, place invariants, CTL).

Subpackages map one-to-one onto the toolchain stages:

- ``hashnets.ahcl``       parser/validator/printer for the .ahcl text format
- ``hashnets.behavior``   protocol action trees, stream kinds, trace oracle
- ``hashnets.petri``      interlaced place/transition nets and the token game
- ``hashnets.translate``  configuration -> net translation
- ``hashnets.analyze``    deadlock search, invariants, CTL with macros
- ``hashnets.interop_cli`` PNML/DOT export-import and the ``hashnets`` CLI
"""

__version__ = "0.1.0"
