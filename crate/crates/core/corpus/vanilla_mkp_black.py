def heuristics(item_attr1, item_attr2):
    total = item_attr2.sum(axis=1)
    return np.where(total > 0, item_attr1 / np.maximum(total, 1e-300), 0.0)
