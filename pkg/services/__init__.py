# Services package


