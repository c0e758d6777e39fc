"""Time the dispatch MILP on the bundled cases."""

from mobigrid import io
from mobigrid.cli import bench_case, format_bench

rows = [bench_case(name, repeats=3) for name in io.BUNDLED]
print(format_bench(rows))
