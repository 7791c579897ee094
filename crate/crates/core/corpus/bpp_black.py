def heuristics(node_attr: np.ndarray, node_constraint: int) -> np.ndarray:
    n = node_attr.shape[0]
    heuristics_matrix = np.zeros((n, n))

    num_clusters = min(n // 2, 5)
    kmeans = KMeans(n_clusters=num_clusters)
    clusters = kmeans.fit_predict(node_attr.reshape(-1, 1))

    for i in range(n):
        for j in range(n):
            if i != j:
                combined_attr = node_attr[i] + node_attr[j]
                if combined_attr <= node_constraint:
                    cluster_score = 1 if clusters[i] == clusters[j] else 0.5
                    attractiveness_score = np.exp(-np.abs(node_constraint - combined_attr))
                    heuristics_matrix[i, j] = attractiveness_score * cluster_score
                else:
                    heuristics_matrix[i, j] = 0

    return heuristics_matrix
