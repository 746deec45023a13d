from app.instanton.search import (
    InstantonRecord,
    build_instanton_catalog,
    load_instanton_catalog,
    search_instanton,
)

__all__ = ["InstantonRecord", "build_instanton_catalog", "load_instanton_catalog", "search_instanton"]
