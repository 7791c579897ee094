def heuristics_v2(item_attr1, item_attr2):
    n = len(item_attr1)
    m = item_attr2.shape[1]
    total_weight = np.sum(item_attr2, axis=1, keepdims=True) + 1e-6  # Avoid division by zero
    heuristics_matrix = np.zeros(n)

    for i in range(n):
        max_weight = np.max(item_attr2[i]) + 1e-6
        normalized_ratio = (item_attr1[i] / max_weight) / total_weight[i]  # Normalize with total weight
        item_contributions = np.sum(item_attr2[i])
        
        # Safety check to prevent numerical instability
        if item_contributions > 0:
            heuristics_matrix[i] = np.power(normalized_ratio, 2) * item_contributions  # Weight by item contributions

    heuristics_matrix = np.clip(heuristics_matrix, 0, None)  # Ensure non-negative values
    return heuristics_matrix
