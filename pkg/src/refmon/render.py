"""DOT emission and matplotlib figure rendering.

Poset diagrams follow the paper-style presentation: covers drawn as arrows
from the upper element down to the lower one, layered by height.  Figures
are written as PNG files next to the delimited reports.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .posets import id_sort_key


def _label(x):
    if isinstance(x, tuple) and all(isinstance(v, str) for v in x):
        return "·".join(x)
    return str(x)


def poset_dot(poset, name="poset", labels=None):
    labels = labels or {}
    lines = [f'digraph "{name}" {{', "  rankdir=TB;",
             '  node [shape=plaintext, fontsize=12];']
    for x in sorted(poset.ids, key=id_sort_key):
        text = labels.get(x, _label(x))
        lines.append(f'  "{_label(x)}" [label="{text}"];')
    for lo, hi in sorted(poset.cover_pairs(),
                         key=lambda ab: (id_sort_key(ab[1]),
                                         id_sort_key(ab[0]))):
        lines.append(f'  "{_label(hi)}" -> "{_label(lo)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def system_dot(system, name="system"):
    labels = {}
    for x in system.poset.ids:
        g = system.group(x)
        parts = ["Z"] * g.rank + [f"Z/{d}" for d in g.torsion]
        gtxt = "+".join(parts) if parts else "0"
        labels[x] = f"{_label(x)} [{system.kind(x)}; {gtxt}]"
    return poset_dot(system.poset, name=name, labels=labels)


def chain_tree_dot(ct, name="chain_tree"):
    labels = {node: _label(node) for node in ct.tree.ids}
    return poset_dot(ct.tree, name=name, labels=labels)


def _layers(poset):
    """Element heights (longest chain strictly below)."""
    height = {}
    for i in poset.linear_extension():
        below = [height[j] for j in poset.iter_mask(
            poset.down[i] & ~(1 << i))]
        height[i] = 1 + max(below, default=-1)
    return height


def poset_figure(poset, path, title=None, labels=None):
    """Layered Hasse diagram written to a PNG file."""
    labels = labels or {}
    height = _layers(poset)
    byl = {}
    for i in range(poset.n):
        byl.setdefault(height[i], []).append(i)
    pos = {}
    for lvl, members in byl.items():
        members.sort(key=lambda i: id_sort_key(poset.ids[i]))
        k = len(members)
        for col, i in enumerate(members):
            pos[i] = ((col - (k - 1) / 2.0), lvl)
    width = max(3.0, 0.9 * max((len(m) for m in byl.values()), default=1))
    heightin = max(2.2, 0.9 * (len(byl) or 1))
    fig, ax = plt.subplots(figsize=(width, heightin))
    for j in range(poset.n):
        for i in poset.iter_mask(poset.covers_down[j]):
            ax.plot([pos[j][0], pos[i][0]], [pos[j][1], pos[i][1]],
                    color="0.55", lw=1.0, zorder=1)
    for i in range(poset.n):
        x, y = pos[i]
        text = labels.get(poset.ids[i], _label(poset.ids[i]))
        ax.text(x, y, text, ha="center", va="center", fontsize=9, zorder=2,
                bbox=dict(boxstyle="round,pad=0.25", fc="white", ec="0.3"))
    if title:
        ax.set_title(title, fontsize=10)
    ax.set_axis_off()
    ax.margins(0.15)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def props_figure(results, path, title="property suites"):
    """Horizontal bar chart of suite case counts, failures highlighted."""
    names = [r.name for r in results]
    cases = [r.cases for r in results]
    fails = [len(r.failures) for r in results]
    fig, ax = plt.subplots(figsize=(6.4, max(2.0, 0.38 * len(names) + 1)))
    ypos = range(len(names))
    colors = ["#d62728" if f else "#4c9f70" for f in fails]
    ax.barh(list(ypos), cases, color=colors)
    for y, (c, f) in enumerate(zip(cases, fails)):
        note = f"{c} cases" + (f", {f} FAILED" if f else "")
        ax.text(c, y, " " + note, va="center", fontsize=8)
    ax.set_yticks(list(ypos))
    ax.set_yticklabels(names, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("checked cases")
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
