"""Exception hierarchy shared across the package."""


class Error(Exception):
    """Base class for all osmkg errors."""


class OsmXmlError(Error):
    """Malformed or invalid OSM XML input."""


class OntologyError(Error):
    """Invalid map-features input or inconsistent ontology."""


class AlignmentError(Error):
    """Invalid alignment table or unresolvable mapping."""


class TurtleError(Error):
    """Turtle serialization or parsing failure."""


class StoreError(Error):
    """Query store could not be loaded from the given documents."""


class QueryError(Error):
    """Invalid query parameters (unknown class, label, ...)."""


class PipelineError(Error):
    """Knowledge-graph build failed."""
