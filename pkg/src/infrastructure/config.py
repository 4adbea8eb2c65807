import dataclasses


# Public keys that differ from the dataclass field names.
KEY_ALIASES = {"lambda": "lmbda"}


def _normalize_key(key):
    key = key.strip().replace("-", "_")
    return KEY_ALIASES.get(key, key)


def public_key(field_name):
    """Return the `key=value` spelling of a config field."""
    for key, name in KEY_ALIASES.items():
        if name == field_name:
            return key
    return field_name


def parse_overrides(lines):
    """Parse `key=value` lines into a dict of strings. Blank lines and lines starting
    with `#` are ignored.
    """
    overrides = {}
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {number}: expected 'key=value', got {line!r}")
        key, value = line.split("=", 1)
        overrides[_normalize_key(key)] = value.strip()
    return overrides


def load_config_file(path):
    """Read `key=value` overrides from a plain text file."""
    with open(path, "r") as f:
        return parse_overrides(f.readlines())


def _coerce(field, value):
    if not isinstance(value, str):
        return value
    if field.type in (bool, "bool"):
        if value.lower() in ("1", "true", "yes"):
            return True
        if value.lower() in ("0", "false", "no"):
            return False
        raise ValueError(f"Invalid boolean {value!r} for {public_key(field.name)}")
    if field.type in (int, "int"):
        return int(value)
    if field.type in (float, "float"):
        return float(value)
    return value


def apply_overrides(config, *layers):
    """Return a copy of the dataclass `config` with every layer of overrides applied
    in order, so that later layers take precedence.

    Args:
        config (dataclass): The base configuration, usually the built-in defaults.
        layers (dict): Mappings from config key to value. Values given as strings are
            converted to the type of the field. Keys mapped to None are skipped.

    Returns:
        config (dataclass): The merged configuration.
    """
    fields = {f.name: f for f in dataclasses.fields(config)}
    changes = {}
    for layer in layers:
        for key, value in layer.items():
            name = _normalize_key(key)
            if name not in fields:
                raise ValueError(f"Unknown config key {key!r}; expected one of "
                                 f"{sorted(public_key(n) for n in fields)}")
            if value is None:
                continue
            try:
                changes[name] = _coerce(fields[name], value)
            except ValueError as e:
                raise ValueError(f"Invalid value {value!r} for config key {key!r}: {e}") from None
    return dataclasses.replace(config, **changes)


def as_public_dict(config):
    """Return the config as a dict keyed by the public `key=value` spellings."""
    return {public_key(k): v for k, v in dataclasses.asdict(config).items()}
