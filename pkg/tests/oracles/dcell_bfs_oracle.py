"""Independent oracle: DCell server counts and server-hop diameter.

Builds DCell(n, k) directly from the recursive definition (servers are
digit tuples; level-l links pair sub-cells (i, j) via server j-1 of sub-i
and server i of sub-j) with its own BFS, no package imports, no networkx.
Two servers are adjacent if directly linked or if they share a base-cell
switch. Printed values are frozen into tests/test_topology.py.

Run: python3 tests/oracles/dcell_bfs_oracle.py
"""

from collections import deque


def t_levels(n: int, k: int) -> list[int]:
    t = [n]
    for _ in range(k):
        t.append(t[-1] * (t[-1] + 1))
    return t


def build_adj(n: int, k: int) -> list[set[int]]:
    t = t_levels(n, k)
    total = t[k]
    adj: list[set[int]] = [set() for _ in range(total)]
    # base-cell switch: servers in the same block of n are mutually adjacent
    for base in range(0, total, n):
        for a in range(base, base + n):
            for b in range(a + 1, base + n):
                adj[a].add(b)
                adj[b].add(a)
    # level-l links between the t[l-1]+1 sub-cells of every level-l cell
    for level in range(1, k + 1):
        size = t[level]
        sub = t[level - 1]
        n_sub = sub + 1
        for cell_start in range(0, total, size):
            for i in range(n_sub):
                for j in range(i + 1, n_sub):
                    u = cell_start + i * sub + (j - 1)
                    v = cell_start + j * sub + i
                    adj[u].add(v)
                    adj[v].add(u)
    return adj


def diameter(adj: list[set[int]]) -> int:
    best = 0
    n = len(adj)
    for src in range(n):
        dist = [-1] * n
        dist[src] = 0
        dq = deque([src])
        while dq:
            u = dq.popleft()
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    dq.append(v)
        far = max(dist)
        if min(dist) < 0:
            raise SystemExit("disconnected")
        best = max(best, far)
    return best


for n, k in ((4, 1), (2, 0), (3, 2), (2, 1)):
    t = t_levels(n, k)
    adj = build_adj(n, k)
    links = sum(len(s) for s in adj) // 2
    print(f"dcell(n={n},k={k}): servers={t[k]} levels={t} "
          f"diameter={diameter(adj)} adjacency_pairs={links}")
