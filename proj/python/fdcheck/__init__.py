try:
    from . import _fdcheck as _core
except ImportError:  # in-tree build: the extension sits next to the build outputs
    import _fdcheck as _core

Model = _core.Model
parse = _core.parse
bench_model = _core.bench_model
check = _core.check
oracle = _core.oracle
translate = _core.translate
solvers = _core.solvers
solve = _core.solve


def parse_file(path, params=None):
    with open(path, encoding="utf-8") as f:
        return parse(f.read(), params or {}, str(path))


__all__ = ["Model", "parse", "parse_file", "bench_model", "check", "oracle",
           "translate", "solvers", "solve"]
