def heuristics_v2(demand, capacity):
    n = len(demand)
    heuristics_matrix = np.zeros((n, n))

    total_demand = np.sum(demand)
    sorted_indices = np.argsort(demand)[::-1]
    bins = []

    # First-fit decreasing approach
    for idx in sorted_indices:
        placed = False
        for b in bins:
            if sum(demand[i] for i in b) + demand[idx] <= capacity:
                b.append(idx)
                placed = True
                break
        if not placed:
            bins.append([idx])

    # Inter-cluster optimization with different scoring
    for b in bins:
        cluster_size = len(b)
        for i in range(cluster_size):
            for j in range(i + 1, cluster_size):
                idx1 = b[i]
                idx2 = b[j]
                if demand[idx1] + demand[idx2] <= capacity:
                    used_capacity = demand[idx1] + demand[idx2]
                    average_item_size = (demand[idx1] + demand[idx2]) / 2
                    score = (1 / (1 + (capacity - used_capacity) + (average_item_size / capacity)))
                    heuristics_matrix[idx1][idx2] = heuristics_matrix[idx2][idx1] = score

    return heuristics_matrix
