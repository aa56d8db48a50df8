# temporarily stub __init__ while building modules
