"""
Boxes, datasets and their COCO-format ingestion.
"""
