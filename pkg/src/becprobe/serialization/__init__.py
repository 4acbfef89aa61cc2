from .serializer import ConfigSerializer, JsonValue, parse_override, set_dotted

__all__ = ["ConfigSerializer", "JsonValue", "parse_override", "set_dotted"]
