"""Show the partition trick strengthening the nonexistence test.

Graph: two vertices joined by two parallel edges of length 0.9 (a "double
bridge"), one half-line at each vertex. Total core measure is 1.8, above
the whole-graph smallness threshold L2 = 1 at p=4, mu=1, so the one-region
check is inconclusive. Splitting the graph into two regions, each holding
one bridge and one half-line, every region has core measure 0.9 < 1 and the
piecewise argument closes: no ground state exists.
"""

from graphnls import certify_nonexistence, double_bridge, enumerate_partitions

graph = double_bridge(0.9, 0.9)

print("whole-graph check (no partitions allowed):")
whole = certify_nonexistence(graph, p=4.0, mu=1.0, partitions=[])
print(f"  core measure {whole.max_part_measure} vs threshold {whole.threshold}"
      f" -> valid: {whole.valid}")

print("\nall admissible partitions (each region keeps a half-line):")
for q in enumerate_partitions(graph, max_parts=2):
    parts = [sorted(part) for part in q.parts]
    print(f"  {parts}")

print("\nautomatic search over those partitions:")
cert = certify_nonexistence(graph, p=4.0, mu=1.0)
print(f"  best partition: {[sorted(part) for part in cert.partition.parts]}")
print(f"  region core measures: {cert.part_core_measures}")
print(f"  max region measure {cert.max_part_measure} < threshold {cert.threshold}"
      f" -> valid: {cert.valid}")

print("""
The same certificate fails if the mass grows: at mu = 4 the threshold
shrinks by mu^(-1) (p=4) to 0.25 and even the split regions are too big.""")
cert4 = certify_nonexistence(graph, p=4.0, mu=4.0)
print(f"mu=4: threshold {cert4.threshold}, best max region "
      f"{cert4.max_part_measure} -> valid: {cert4.valid}")
