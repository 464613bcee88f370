"""lifeserver: a two-node personal data server.

A public, Internet-facing node ingests personal data and answers aggregate
queries; a private node behind a software data diode holds the key material
and sealed payloads.  Query fees are apportioned to data-source
stakeholders through hierarchical value-distribution documents.
"""

__version__ = "0.1.0"
