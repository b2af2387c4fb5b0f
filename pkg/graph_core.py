# -*- coding: utf-8 -*-
"""
图构造模块 - 完全图、旋转映射与替换积 𝒢₁ ∘ 𝒢₂

顶点编号一律从 0 开始；导出文件时才转换为从 1 开始。
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

logger = logging.getLogger('RepDet.Graph')

Edge = Tuple[int, int]
Port = Tuple[int, int]   # (云编号, 端口标签)


class GraphError(ValueError):
    """图参数或结构不合法"""


@dataclass(frozen=True)
class Graph:
    """简单无向图 - 边以 (min, max) 排序存储，迭代顺序确定"""
    vertex_count: int
    edges: Tuple[Edge, ...] = ()
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.vertex_count < 1:
            raise GraphError(f"顶点数必须为正: {self.vertex_count}")

        normalized = set()
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"不允许自环: ({u}, {v})")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise GraphError(f"边 ({u}, {v}) 超出顶点范围 [0, {self.vertex_count})")
            key = (min(u, v), max(u, v))
            if key in normalized:
                raise GraphError(f"重复的边: {key}")
            normalized.add(key)
        object.__setattr__(self, 'edges', tuple(sorted(normalized)))

        if self.labels is not None:
            if len(self.labels) != self.vertex_count:
                raise GraphError("labels 长度必须等于顶点数")
            object.__setattr__(self, 'labels', tuple(self.labels))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        """每个顶点的度"""
        if not self.edges:
            return np.zeros(self.vertex_count, dtype=np.int64)
        flat = np.asarray(self.edges, dtype=np.int64).ravel()
        return np.bincount(flat, minlength=self.vertex_count)

    def degree(self, v: int) -> int:
        return int(self.degrees()[v])

    def regular_degree(self) -> Optional[int]:
        """正则图返回其度，否则返回 None"""
        deg = self.degrees()
        if np.all(deg == deg[0]):
            return int(deg[0])
        return None

    def is_regular(self) -> bool:
        return self.regular_degree() is not None

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._edge_set

    def neighbours(self, v: int) -> List[int]:
        """v 的邻居（升序）"""
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return sorted(out)

    @property
    def _edge_set(self) -> frozenset:
        cached = self.__dict__.get('_edge_set_cache')
        if cached is None:
            cached = frozenset(self.edges)
            object.__setattr__(self, '_edge_set_cache', cached)
        return cached

    def to_networkx(self) -> nx.Graph:
        """转换为 networkx 图（顶点带 label 属性）"""
        g = nx.Graph()
        for v in range(self.vertex_count):
            g.add_node(v, label=self.labels[v] if self.labels else str(v + 1))
        g.add_edges_from(self.edges)
        return g

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())


@dataclass(frozen=True)
class Rotation:
    """
    旋转映射 - 替换积所需的端口匹配

    ports[v] 是顶点 v 的端口标签序列，第 k 个端口对应云中第 k 个顶点；
    table[(v, p)] = (w, q) 表示 v 的端口 p 与 w 的端口 q 相连。
    """
    ports: Tuple[Tuple[int, ...], ...]
    table: Dict[Port, Port] = field(default_factory=dict)

    def __call__(self, cloud: int, port: int) -> Port:
        try:
            return self.table[(cloud, port)]
        except KeyError:
            raise GraphError(f"端口 ({cloud}, {port}) 不存在") from None

    def port_rank(self, cloud: int, port: int) -> int:
        """端口在云内的位置（即云中顶点编号）"""
        try:
            return self.ports[cloud].index(port)
        except (IndexError, ValueError):
            raise GraphError(f"云 {cloud} 没有端口 {port}") from None

    def is_involution(self) -> bool:
        """映射两次回到出发端口"""
        for start, image in self.table.items():
            if self.table.get(image) != start:
                return False
        return True


def _complete(n: int) -> Graph:
    edges = tuple((u, v) for u in range(n) for v in range(u + 1, n))
    return Graph(vertex_count=n, edges=edges)


def complete_graph(n: int) -> Graph:
    """完全图 𝒦ₙ（n ≥ 2），(n−1) 正则，共 n(n−1)/2 条边"""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise GraphError(f"完全图要求 n ≥ 2，收到 {n!r}")
    return _complete(int(n))


def complete_cloud(size: int) -> Graph:
    """作为云使用的完全图，允许 𝒦₁（单顶点、无边）"""
    if size < 1:
        raise GraphError(f"云至少包含一个顶点，收到 {size}")
    return _complete(size)


def canonical_rotation_complete(n: int) -> Rotation:
    """𝒦ₙ 的规范旋转：云 i 的端口 j ↔ 云 j 的端口 i"""
    if n < 2:
        raise GraphError(f"旋转映射要求 n ≥ 2，收到 {n!r}")
    ports = tuple(tuple(j for j in range(n) if j != i) for i in range(n))
    table = {(i, j): (j, i) for i in range(n) for j in range(n) if i != j}
    return Rotation(ports=ports, table=table)


def _check_rotation(g1: Graph, d1: int, rot: Rotation) -> None:
    if len(rot.ports) != g1.vertex_count:
        raise GraphError("旋转映射的云数与 g1 顶点数不一致")
    for v, ports in enumerate(rot.ports):
        if len(ports) != d1 or len(set(ports)) != d1:
            raise GraphError(f"云 {v} 的端口数应为 {d1}")
        for p in ports:
            if (v, p) not in rot.table:
                raise GraphError(f"端口 ({v}, {p}) 没有映射")
    if len(rot.table) != g1.vertex_count * d1:
        raise GraphError("旋转映射包含多余的端口")
    if not rot.is_involution():
        raise GraphError("旋转映射不是对合")
    for (v, p), (w, q) in rot.table.items():
        if v == w or not g1.has_edge(v, w):
            raise GraphError(f"端口 ({v}, {p}) → ({w}, {q}) 不对应 g1 的边")
        if q not in rot.ports[w]:
            raise GraphError(f"云 {w} 没有端口 {q}")
    # 每条 g1 边恰好被一对端口使用
    used = {(min(v, w), max(v, w)) for (v, _), (w, _) in rot.table.items()}
    if len(used) != g1.edge_count or len(rot.table) != 2 * g1.edge_count:
        raise GraphError("旋转映射与 g1 的边集不一致")


def replacement_product(g1: Graph, g2: Graph, rot: Rotation) -> Graph:
    """
    替换积 𝒢₁ ∘ 𝒢₂

    g1 的每个顶点替换为 g2 的一个副本（云），云内保留 g2 的边，
    云间按 rot 为每个端口连一条边。结果有 d₁·|V₁| 个顶点，(d₂+1) 正则。
    """
    d1 = g1.regular_degree()
    if d1 is None:
        raise GraphError("g1 不是正则图")
    d2 = g2.regular_degree()
    if d2 is None:
        raise GraphError("g2 不是正则图")
    if g2.vertex_count != d1:
        raise GraphError(f"|V₂| = {g2.vertex_count} 与 g1 的度 {d1} 不一致")
    _check_rotation(g1, d1, rot)

    edges = []
    for v in range(g1.vertex_count):
        base = v * d1
        # 云内边
        edges.extend((base + a, base + b) for a, b in g2.edges)
        # 云间边，每条只加一次
        for k, p in enumerate(rot.ports[v]):
            w, q = rot(v, p)
            if (v, p) < (w, q):
                edges.append((base + k, w * d1 + rot.port_rank(w, q)))

    product = Graph(vertex_count=d1 * g1.vertex_count, edges=tuple(edges))
    logger.debug(
        f"替换积: |V| = {product.vertex_count}, |E| = {product.edge_count}, 度 = {d2 + 1}"
    )
    return product


def pair_label(i: int, j: int) -> str:
    """变量 x_{ij} 的标签（i, j 从 1 开始）"""
    return f"x{i}_{j}"


def covariance_selection_graph(n: int) -> Graph:
    """
    协方差选择图 𝒦ₙ ∘ 𝒦ₙ₋₁，按有序对 (i, j) 直接构造

    顶点顺序与 model.variable_index 的扁平编号一致：
    云 i 升序，云内端口 j 升序。
    """
    if n < 2:
        raise GraphError(f"协方差选择图要求 n ≥ 2，收到 {n!r}")

    pairs = [(i, j) for i in range(n) for j in range(n) if j != i]
    index = {pair: k for k, pair in enumerate(pairs)}

    edges = []
    for (i, j), k in index.items():
        for m in range(j + 1, n):
            if m != i:
                edges.append((k, index[(i, m)]))
        if i < j:
            edges.append((k, index[(j, i)]))

    labels = tuple(pair_label(i + 1, j + 1) for i, j in pairs)
    return Graph(vertex_count=len(pairs), edges=tuple(edges), labels=labels)


def dual_interaction_graph(n: int) -> Graph:
    """对偶模型的交互图：对偶变量 ω₁…ωₙ 上的 𝒦ₙ"""
    g = complete_graph(n)
    return Graph(vertex_count=n, edges=g.edges, labels=tuple(f"w{i + 1}" for i in range(n)))


def edge_list_lines(graph: Graph) -> Iterable[str]:
    """每条边一行 "u v"（从 1 开始，字典序）"""
    for u, v in graph.edges:
        yield f"{u + 1} {v + 1}"


def export_edge_list(graph: Graph, destination) -> None:
    """导出邻接关系为边列表文本文件"""
    with open(destination, 'w', encoding='utf-8', newline='\n') as f:
        for line in edge_list_lines(graph):
            f.write(line + '\n')
    logger.info(f"边列表已写入 {destination} ({graph.edge_count} 条边)")
